#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "zhukcsp/xy.hpp"

using namespace zhukcsp;

TEST_CASE("check_xy_symmetric") {
    CHECK(check_xy_symmetric(catalog("Z2")));   // fully symmetric
    CHECK(check_xy_symmetric(catalog("MAJ")));
    CHECK(check_xy_symmetric(catalog("F3")));
    CHECK(check_xy_symmetric(catalog("F5")));
    FiniteAlgebra proj = load_algebra("size 2\narity 3\ntable 0 0 0 0 1 1 1 1\n", true);
    CHECK_FALSE(check_xy_symmetric(proj));  // p(x,x,y) = x != y = p(y,x,x)
}

TEST_CASE("check_k_wnu") {
    FiniteAlgebra z2 = catalog("Z2");
    for (int k = 1; k <= 2; ++k) CHECK(check_k_wnu(z2, k));
    FiniteAlgebra f5 = catalog("F5");
    for (int k = 1; k <= 4; ++k) CHECK(check_k_wnu(f5, k));
    CHECK_THROWS_AS(check_k_wnu(z2, 3), InputError);
}

TEST_CASE("generated relation for Z2 at n = 3") {
    GeneratedRelation r = build_generated_relation({catalog("Z2")}, 3);
    CHECK(r.width() == 6);  // (2^2 - 1) * 2 * 1
    CHECK(r.closure.tuples.size() == 4);
    // invariance under all six coordinate permutations
    std::set<Tuple> tuples(r.closure.tuples.begin(), r.closure.tuples.end());
    std::vector<int> perm = {0, 1, 2};
    do {
        auto act = r.key_action(perm);
        for (const Tuple& t : r.closure.tuples) {
            Tuple moved(t.size());
            for (std::size_t k = 0; k < t.size(); ++k) moved[k] = t[act[k]];
            CHECK(tuples.count(moved));
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("generated relation respects per-key domains and provenance") {
    GeneratedRelation r = build_generated_relation(with_nontrivial_subalgebras(catalog("F3")), 3);
    CHECK(r.algebras.size() == 4);  // F3 plus its three two-element subalgebras
    CHECK(r.width() == 36);
    for (const Tuple& t : r.closure.tuples)
        for (std::size_t k = 0; k < r.width(); ++k) {
            const auto& dom = r.key_domain[k];
            CHECK(std::find(dom.begin(), dom.end(), t[k]) != dom.end());
        }
    // provenance terms re-evaluate on the generators
    for (std::size_t i = 0; i < r.closure.tuples.size(); ++i) {
        Term t = extract_term(r.closure, i);
        for (std::size_t k = 0; k < r.width(); ++k) {
            auto apply = [&](const std::vector<Elem>& a) {
                return r.algebras[r.keys[k].alg].apply(a);
            };
            std::vector<Elem> leaves(3);
            for (int j = 0; j < 3; ++j) leaves[j] = r.keys[k].alpha[j];
            CHECK(eval_term(t, leaves, apply) == r.closure.tuples[i][k]);
        }
    }
}

TEST_CASE("symmetric_reduce on MAJ collapses to the majority tuple") {
    GeneratedRelation r = build_generated_relation({catalog("MAJ")}, 3);
    auto red = symmetric_reduce(r, r.key_domain);
    REQUIRE(red.has_value());
    FiniteAlgebra maj = catalog("MAJ");
    for (std::size_t k = 0; k < r.width(); ++k) {
        REQUIRE((*red)[k].size() == 1);
        CHECK((*red)[k][0] == maj.apply(r.keys[k].alpha));
    }
}

TEST_CASE("symmetric_reduce reports no change on Z2 and on singletons") {
    GeneratedRelation r = build_generated_relation({catalog("Z2")}, 3);
    CHECK_FALSE(symmetric_reduce(r, r.key_domain).has_value());
    std::vector<std::vector<Elem>> singl(r.width());
    for (std::size_t k = 0; k < r.width(); ++k) singl[k] = {r.keys[k].alpha[0]};
    CHECK_FALSE(symmetric_reduce(r, singl).has_value());
}

TEST_CASE("derive_xy on the catalog fixtures") {
    // Z2: the derived operation is x + y + z itself
    XYDerivation z2 = derive_xy(catalog("Z2"), 3);
    CHECK(z2.op == catalog("Z2"));
    CHECK(check_xy_symmetric(z2.op));

    XYDerivation maj = derive_xy(catalog("MAJ"), 3);
    CHECK(maj.op == catalog("MAJ"));

    XYDerivation and3 = derive_xy(catalog("AND3"), 3);
    CHECK(check_xy_symmetric(and3.op));

    XYDerivation f3 = derive_xy(catalog("F3"), 3);
    CHECK(check_xy_symmetric(f3.op));
    // every k-WNU identity holds on the outputs
    for (int k = 1; k < 3; ++k) {
        CHECK(check_k_wnu(f3.op, k));
        CHECK(check_k_wnu(and3.op, k));
    }
}

TEST_CASE("derive_xy succeeds for every special idempotent arity-3 WNU on two elements") {
    int found = 0;
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
            FiniteAlgebra a = make_algebra(2, 3, [&](const std::vector<Elem>& x) {
                int ones = x[0] + x[1] + x[2];
                if (ones == 0) return Elem{0};
                if (ones == 3) return Elem{1};
                return static_cast<Elem>(ones == 1 ? u : v);
            });
            if (!(a.idempotent && a.wnu && a.special)) continue;
            ++found;
            XYDerivation d = derive_xy(a, 3);
            CHECK(check_xy_symmetric(d.op));
            // the witness term re-evaluates to the emitted table
            auto apply = [&](const std::vector<Elem>& args) { return a.apply(args); };
            std::vector<Elem> args(3);
            for (std::size_t idx = 0; idx < d.op.table.size(); ++idx) {
                detail::decode_args(idx, 2, 3, args);
                CHECK(eval_term(d.term, args, apply) == d.op.table[idx]);
            }
        }
    CHECK(found == 4);  // majority, minority, and the two semilattice-like tables
}

TEST_CASE("derive_xy with blockwise variable duplication") {
    // F5 has arity 5; asking for arity 5 uses it directly
    XYDerivation f5 = derive_xy(catalog("F5"), 5);
    CHECK(check_xy_symmetric(f5.op));
    CHECK_THROWS_AS(derive_xy(catalog("F5"), 3), InputError);  // 3 does not divide 5
    CHECK_THROWS_AS(derive_xy(catalog("Z2"), 4), InputError);
}

TEST_CASE("derive_xy on Z3 at arity 7 finds the full sum quickly") {
    XYDerivation z3 = derive_xy(catalog("Z3"), 7);
    CHECK(z3.op == catalog("Z3"));
}

TEST_CASE("term rendering uses nested prefix notation") {
    XYDerivation z2 = derive_xy(catalog("Z2"), 3);
    std::string s = term_to_string(z2.term);
    CHECK(s.find("(w") != std::string::npos);
    CHECK(s.find("x1") != std::string::npos);
}
