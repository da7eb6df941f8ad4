#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zhukcsp/subuniverse.hpp"

using namespace zhukcsp;

TEST_CASE("enumerate_subuniverses") {
    auto z2 = enumerate_subuniverses(catalog("Z2"));
    CHECK(z2 == std::vector<std::vector<Elem>>{{0}, {1}, {0, 1}});
    // F3 is conservative: every nonempty subset is closed
    CHECK(enumerate_subuniverses(catalog("F3")).size() == 7);
    // DD3: all singletons and all pairs
    auto dd3 = enumerate_subuniverses(catalog("DD3"));
    CHECK(dd3.size() == 7);
    // Z3: only singletons and the full set
    auto z3 = enumerate_subuniverses(catalog("Z3"));
    CHECK(z3 == std::vector<std::vector<Elem>>{{0}, {1}, {2}, {0, 1, 2}});
}

TEST_CASE("binary absorption") {
    // AND3: {0} absorbs with x & y
    AbsorptionResult r = is_binary_absorbing(catalog("AND3"), {0});
    REQUIRE(r.absorbing);
    FiniteAlgebra and3 = catalog("AND3");
    auto apply = [&](const std::vector<Elem>& a) { return and3.apply(a); };
    for (int a = 0; a < 2; ++a) {
        CHECK(eval_term(r.witness, {0, static_cast<Elem>(a)}, apply) == 0);
        CHECK(eval_term(r.witness, {static_cast<Elem>(a), 0}, apply) == 0);
    }

    // MAJ: binary clone is projections, so no binary absorption
    AbsorptionResult m = is_binary_absorbing(catalog("MAJ"), {0});
    CHECK_FALSE(m.absorbing);
    CHECK(m.counterwitness.size() == 2);

    // Z2: Sg{(0,1),(1,0)} misses {0}^2
    AbsorptionResult z = is_binary_absorbing(catalog("Z2"), {0});
    CHECK_FALSE(z.absorbing);

    // F3: {0,1} absorbs with w(x,x,y)
    AbsorptionResult f = is_binary_absorbing(catalog("F3"), {0, 1});
    CHECK(f.absorbing);
}

TEST_CASE("ternary absorption") {
    CHECK(is_ternary_absorbing(catalog("MAJ"), {0}).absorbing);
    CHECK(is_ternary_absorbing(catalog("MAJ"), {1}).absorbing);
    CHECK_FALSE(is_ternary_absorbing(catalog("Z2"), {0}).absorbing);
    CHECK_FALSE(is_ternary_absorbing(catalog("F3"), {2}).absorbing);
    // binary absorbing implies ternary absorbing (pad the witness)
    for (const char* name : {"AND3", "F3"}) {
        FiniteAlgebra alg = catalog(name);
        for (const auto& b : enumerate_subuniverses(alg)) {
            if (static_cast<int>(b.size()) == alg.size) continue;
            if (is_binary_absorbing(alg, b).absorbing) CHECK(is_ternary_absorbing(alg, b).absorbing);
        }
    }
}

TEST_CASE("centrality") {
    CHECK(is_central(catalog("MAJ"), {0}));
    CHECK(is_central(catalog("MAJ"), {1}));
    CHECK_FALSE(is_central(catalog("Z2"), {0}));
    CHECK_FALSE(is_central(catalog("Z3"), {0}));
    CHECK(is_central(catalog("DD3"), {0}));
    // central implies ternary absorbing
    for (const char* name : {"MAJ", "DD3", "AND3"}) {
        FiniteAlgebra alg = catalog(name);
        for (const auto& b : enumerate_subuniverses(alg)) {
            if (static_cast<int>(b.size()) == alg.size) continue;
            if (is_central(alg, b)) CHECK(is_ternary_absorbing(alg, b).absorbing);
        }
    }
}

TEST_CASE("no proper BA or central subuniverse on affine algebras") {
    for (const char* name : {"Z2", "Z3", "Z2xZ2"}) {
        FiniteAlgebra alg = catalog(name);
        for (const auto& b : enumerate_subuniverses(alg)) {
            if (static_cast<int>(b.size()) == alg.size) continue;
            INFO(name);
            CHECK_FALSE(is_binary_absorbing(alg, b).absorbing);
            CHECK_FALSE(is_central(alg, b));
        }
    }
}

TEST_CASE("find_strong_subuniverse") {
    StrongFinding maj = find_strong_subuniverse(catalog("MAJ"));
    CHECK(maj.kind == StrongKind::Central);
    CHECK(maj.subset == std::vector<Elem>{0});

    StrongFinding z2 = find_strong_subuniverse(catalog("Z2"));
    CHECK(z2.kind == StrongKind::LinearOnly);
    REQUIRE(z2.linears.size() == 1);
    CHECK(z2.linears[0] == equality_congruence(2));

    StrongFinding and3 = find_strong_subuniverse(catalog("AND3"));
    CHECK(and3.kind == StrongKind::BA);
    CHECK(and3.subset == std::vector<Elem>{0});

    StrongFinding f3 = find_strong_subuniverse(catalog("F3"));
    CHECK(f3.kind == StrongKind::BA);
    CHECK(f3.subset == std::vector<Elem>{0, 1});

    // DD3: {0} is central (checked above), which precedes the PC-congruence
    // route in the priority order
    StrongFinding dd3 = find_strong_subuniverse(catalog("DD3"));
    CHECK(dd3.kind == StrongKind::Central);
    CHECK(dd3.subset == std::vector<Elem>{0});

    StrongFinding z3 = find_strong_subuniverse(catalog("Z3"));
    CHECK(z3.kind == StrongKind::LinearOnly);

    StrongFinding one = find_strong_subuniverse(restrict_algebra(catalog("Z2"), {0}).algebra);
    CHECK(one.kind == StrongKind::None);
}
