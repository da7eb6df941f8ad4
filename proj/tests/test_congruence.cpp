#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "zhukcsp/classify.hpp"
#include "zhukcsp/congruence.hpp"

using namespace zhukcsp;

namespace {

// Independent oracle: enumerate every partition of the domain and keep the
// ones compatible with the operation (checked by brute force over all
// argument tuples).
std::vector<Congruence> partition_filter_oracle(const FiniteAlgebra& alg) {
    int k = alg.size;
    std::vector<Congruence> out;
    std::vector<Elem> block(k, 0);
    std::function<void(int, int)> rec = [&](int i, int maxb) {
        if (i == k) {
            Congruence c;
            c.block_of = block;
            c.blocks = maxb;
            bool ok = true;
            std::vector<Elem> a1(alg.arity), a2(alg.arity);
            // all pairs of argument tuples, coordinatewise congruent
            std::function<void(int)> chk = [&](int pos) {
                if (!ok) return;
                if (pos == alg.arity) {
                    if (c.block_of[alg.apply(a1)] != c.block_of[alg.apply(a2)]) ok = false;
                    return;
                }
                for (int u = 0; u < k && ok; ++u)
                    for (int v = 0; v < k && ok; ++v) {
                        if (c.block_of[u] != c.block_of[v]) continue;
                        a1[pos] = static_cast<Elem>(u);
                        a2[pos] = static_cast<Elem>(v);
                        chk(pos + 1);
                    }
            };
            chk(0);
            if (ok) out.push_back(c);
            return;
        }
        for (int b = 0; b <= maxb; ++b) {
            block[i] = static_cast<Elem>(b);
            rec(i + 1, std::max(maxb, b + 1));
        }
    };
    rec(0, 0);
    return out;
}

Congruence parts(const FiniteAlgebra& alg, std::vector<std::vector<Elem>> blocks) {
    Congruence c;
    c.block_of.resize(alg.size);
    c.blocks = static_cast<int>(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (Elem e : blocks[b]) c.block_of[e] = static_cast<Elem>(b);
    return c;
}

}  // namespace

TEST_CASE("cg computes principal congruences") {
    FiniteAlgebra z4 = catalog("Z4w5");
    Congruence c = cg(z4, {{0, 2}});
    CHECK(c == parts(z4, {{0, 2}, {1, 3}}));
    CHECK(cg(z4, {}) == equality_congruence(4));

    FiniteAlgebra z2x = catalog("Z2xZ2");
    // relate (0,0) ~ (0,1): kernel of the first projection
    Congruence k1 = cg(z2x, {{0, 1}});
    CHECK(k1 == parts(z2x, {{0, 1}, {2, 3}}));
}

TEST_CASE("all_congruences matches the partition-filter oracle") {
    for (const char* name : {"Z2", "MAJ", "AND3", "DD3", "F3", "Z4w5", "Z2xZ2"}) {
        FiniteAlgebra alg = catalog(name);
        auto got = all_congruences(alg);
        auto want = partition_filter_oracle(alg);
        std::set<std::vector<Elem>> gs, ws;
        for (const auto& c : got) gs.insert(c.block_of);
        for (const auto& c : want) ws.insert(c.block_of);
        INFO(name);
        CHECK(gs == ws);
    }
    CHECK(all_congruences(catalog("Z2")).size() == 2);
    CHECK(all_congruences(catalog("Z4w5")).size() == 3);   // equality, mod 2, full
    CHECK(all_congruences(catalog("Z2xZ2")).size() == 5);  // the subgroup lattice of Z2^2
}

TEST_CASE("quotient relabels blocks by least member") {
    FiniteAlgebra z4 = catalog("Z4w5");
    FiniteAlgebra q = quotient(z4, parts(z4, {{0, 2}, {1, 3}}));
    FiniteAlgebra want = make_algebra(2, 5, [](const std::vector<Elem>& x) {
        return static_cast<Elem>((x[0] + x[1] + x[2] + x[3] + x[4]) % 2);
    });
    CHECK(q == want);
    // quotient by equality is an isomorphic copy
    CHECK(quotient(z4, equality_congruence(4)) == z4);
    CHECK_THROWS_AS(quotient(z4, parts(z4, {{0, 1}, {2, 3}})), InputError);
}

TEST_CASE("quotient and restrict commute up to relabeling") {
    FiniteAlgebra z2x = catalog("Z2xZ2");
    // restrict to {0,1} then quotient by equality == quotient first by the
    // second-projection kernel restricted accordingly
    RestrictedAlgebra r = restrict_algebra(z2x, {0, 1});
    CHECK(r.algebra == catalog("Z2"));
    Congruence k2 = cg(z2x, {{0, 2}});  // kernel of second projection: {0,2},{1,3}
    FiniteAlgebra q = quotient(z2x, k2);
    CHECK(q == catalog("Z2"));
}

TEST_CASE("is_abelian on catalog algebras") {
    CHECK(is_abelian(catalog("Z2")));
    CHECK(is_abelian(catalog("Z3")));
    CHECK(is_abelian(catalog("Z4w5")));
    CHECK(is_abelian(catalog("Z2xZ2")));
    CHECK_FALSE(is_abelian(catalog("MAJ")));
    CHECK_FALSE(is_abelian(catalog("DD3")));
    CHECK_FALSE(is_abelian(catalog("AND3")));
    CHECK_FALSE(is_abelian(catalog("F3")));
}

TEST_CASE("irreducible_with_cover on Z4w5") {
    FiniteAlgebra z4 = catalog("Z4w5");
    CoverReport rep = irreducible_with_cover(z4, equality_congruence(4));
    CHECK(rep.irreducible);
    RelMask mod2 = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            if ((a - b) % 2 == 0) mod2 |= rel_bit(a, b);
    CHECK(rep.cover == mod2);
}

TEST_CASE("equality is not irreducible on MAJ and Z2xZ2") {
    CHECK_FALSE(irreducible_with_cover(catalog("MAJ"), equality_congruence(2)).irreducible);
    CHECK_FALSE(irreducible_with_cover(catalog("Z2xZ2"), equality_congruence(4)).irreducible);
}

TEST_CASE("classify_irreducible: linear fixtures") {
    FiniteAlgebra z4 = catalog("Z4w5");
    IrreducibleReport rep = analyze_congruence(z4, equality_congruence(4));
    REQUIRE(rep.irreducible);
    CHECK(rep.cls == IrrClass::Linear);
    CHECK(rep.prime == 2);
    CHECK(verify_bridge(rep.bridge).ok);
    CHECK(tilde(rep.bridge) == rep.cover);

    FiniteAlgebra z2 = catalog("Z2");
    IrreducibleReport rz2 = analyze_congruence(z2, equality_congruence(2));
    REQUIRE(rz2.irreducible);
    CHECK(rz2.cls == IrrClass::Linear);
    CHECK(rz2.prime == 2);
    CHECK(rz2.cover == rel_full(2));

    FiniteAlgebra z3 = catalog("Z3");
    IrreducibleReport rz3 = analyze_congruence(z3, equality_congruence(3));
    REQUIRE(rz3.irreducible);
    CHECK(rz3.cls == IrrClass::Linear);
    CHECK(rz3.prime == 3);
    CHECK(rz3.cover == rel_full(3));
}

TEST_CASE("classify_irreducible: PC fixture") {
    FiniteAlgebra dd3 = catalog("DD3");
    IrreducibleReport rep = analyze_congruence(dd3, equality_congruence(3));
    REQUIRE(rep.irreducible);
    CHECK(rep.cover == rel_full(3));
    CHECK(rep.cls == IrrClass::PC);
}

TEST_CASE("linear_group_structure") {
    GroupInfo g2 = linear_group_structure(catalog("Z2"));
    CHECK(g2.zero == 0);
    CHECK(g2.gens == std::vector<Elem>{1});
    CHECK(g2.gen_prime == std::vector<int>{2});
    CHECK(g2.add[1][1] == 0);

    // quotient(Z4w5, mod 2) is Z_2
    FiniteAlgebra z4 = catalog("Z4w5");
    GroupInfo gq = linear_group_structure(quotient(z4, parts(z4, {{0, 2}, {1, 3}})));
    CHECK(gq.gen_prime == std::vector<int>{2});

    GroupInfo g22 = linear_group_structure(catalog("Z2xZ2"));
    CHECK(g22.gens.size() == 2);
    CHECK(g22.gen_prime == std::vector<int>{2, 2});

    GroupInfo g3 = linear_group_structure(catalog("Z3"));
    CHECK(g3.gen_prime == std::vector<int>{3});
    // (arity - 1) divisible by each prime
    CHECK((catalog("Z3").arity - 1) % 3 == 0);

    CHECK_THROWS_AS(linear_group_structure(catalog("MAJ")), DiagnosticError);
}

TEST_CASE("minimal_full_linear") {
    auto z2 = minimal_full_linear(catalog("Z2"));
    CHECK(z2.sigma == equality_congruence(2));
    auto maj = minimal_full_linear(catalog("MAJ"));
    CHECK(maj.sigma.is_full());
    CHECK(maj.linears.empty());
    auto z2x = minimal_full_linear(catalog("Z2xZ2"));
    CHECK(z2x.sigma == equality_congruence(4));
    CHECK(z2x.linears.size() == 3);  // three subgroup kernels, each with full cover
}
