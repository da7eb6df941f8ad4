#ifndef ZHUKCSP_BRIDGE_HPP
#define ZHUKCSP_BRIDGE_HPP

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "zhukcsp/congruence.hpp"
#include "zhukcsp/core.hpp"

namespace zhukcsp {

using Quad = std::array<Elem, 4>;

// A 4-ary relation linking two congruences: the first two coordinates live in
// D1 (stable under s1), the last two in D2 (stable under s2).
struct Bridge {
    FiniteAlgebra alg1, alg2;
    Congruence s1, s2;
    std::vector<Quad> quads;  // sorted, unique

    bool self_bridge() const { return alg1 == alg2 && s1 == s2; }
};

inline void sort_quads(std::vector<Quad>& qs) {
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
}

inline RelMask tilde(const Bridge& b) {
    RelMask r = 0;
    for (const Quad& q : b.quads)
        if (q[0] == q[1] && q[2] == q[3]) r |= rel_bit(q[0], q[2]);
    return r;
}

inline Bridge inverse(const Bridge& b) {
    Bridge out;
    out.alg1 = b.alg2;
    out.alg2 = b.alg1;
    out.s1 = b.s2;
    out.s2 = b.s1;
    out.quads.reserve(b.quads.size());
    for (const Quad& q : b.quads) out.quads.push_back({q[2], q[3], q[0], q[1]});
    sort_quads(out.quads);
    return out;
}

struct BridgeCheck {
    bool ok = true;
    int failed_axiom = 0;  // 1..4 per the definition
    Quad witness{};
};

// Exhaustive check of the four bridge axioms; reports the first violation.
inline BridgeCheck verify_bridge(const FiniteAlgebra& alg1, const FiniteAlgebra& alg2,
                                 const std::vector<Quad>& quads, const Congruence& s1,
                                 const Congruence& s2) {
    BridgeCheck res;
    auto fail = [&](int ax, const Quad& w) {
        res.ok = false;
        res.failed_axiom = ax;
        res.witness = w;
        return res;
    };
    if (quads.empty()) return fail(3, Quad{});
    std::set<Quad> in(quads.begin(), quads.end());

    // (1) closed under the coordinatewise operation
    {
        int n = alg1.arity;
        if (alg2.arity != n) throw InputError("verify_bridge: arity mismatch");
        if (alg1 == alg2) {
            std::vector<Tuple> set;
            set.reserve(quads.size());
            for (const Quad& q : quads) set.push_back({q[0], q[1], q[2], q[3]});
            Tuple witness;
            if (!tuples_closed_under_op(alg1, set, &witness))
                return fail(1, {witness[0], witness[1], witness[2], witness[3]});
        } else {
            bool sym = alg1.symmetric && alg2.symmetric;
            std::size_t m = quads.size();
            std::vector<std::size_t> idx(n, 0);
            std::vector<Elem> a1(n), a2(n), a3(n), a4(n);
            while (true) {
                for (int i = 0; i < n; ++i) {
                    const Quad& q = quads[idx[i]];
                    a1[i] = q[0];
                    a2[i] = q[1];
                    a3[i] = q[2];
                    a4[i] = q[3];
                }
                Quad out{alg1.apply(a1), alg1.apply(a2), alg2.apply(a3), alg2.apply(a4)};
                if (!in.count(out)) return fail(1, out);
                int pos = n - 1;
                while (pos >= 0 && idx[pos] + 1 == m) --pos;
                if (pos < 0) break;
                ++idx[pos];
                std::size_t base = sym ? idx[pos] : 0;
                for (int i = pos + 1; i < n; ++i) idx[i] = base;
            }
        }
    }
    // (2) stability under the endpoint congruences
    for (const Quad& q : quads) {
        for (int x = 0; x < alg1.size; ++x) {
            if (s1.same(q[0], x) && !in.count({static_cast<Elem>(x), q[1], q[2], q[3]}))
                return fail(2, {static_cast<Elem>(x), q[1], q[2], q[3]});
            if (s1.same(q[1], x) && !in.count({q[0], static_cast<Elem>(x), q[2], q[3]}))
                return fail(2, {q[0], static_cast<Elem>(x), q[2], q[3]});
        }
        for (int x = 0; x < alg2.size; ++x) {
            if (s2.same(q[2], x) && !in.count({q[0], q[1], static_cast<Elem>(x), q[3]}))
                return fail(2, {q[0], q[1], static_cast<Elem>(x), q[3]});
            if (s2.same(q[3], x) && !in.count({q[0], q[1], q[2], static_cast<Elem>(x)}))
                return fail(2, {q[0], q[1], q[2], static_cast<Elem>(x)});
        }
    }
    // (3) projections strictly contain the endpoint congruences
    {
        RelMask p12 = 0, p34 = 0;
        for (const Quad& q : quads) {
            p12 |= rel_bit(q[0], q[1]);
            p34 |= rel_bit(q[2], q[3]);
        }
        RelMask c1 = s1.pairs(), c2 = s2.pairs();
        if ((p12 & c1) != c1 || p12 == c1) return fail(3, Quad{});
        if ((p34 & c2) != c2 || p34 == c2) return fail(3, Quad{});
    }
    // (4) membership links the congruences
    for (const Quad& q : quads)
        if (s1.same(q[0], q[1]) != s2.same(q[2], q[3])) return fail(4, q);
    return res;
}

inline BridgeCheck verify_bridge(const Bridge& b) {
    return verify_bridge(b.alg1, b.alg2, b.quads, b.s1, b.s2);
}

// rho(x1,x2,z1,z2) = exists y1 y2: b1(x1,x2,y1,y2) and b2(y1,y2,z1,z2).
// Requires matching endpoints and irreducible endpoint congruences.
inline Bridge compose_bridges(const Bridge& b1, const Bridge& b2) {
    if (!(b1.alg2 == b2.alg1) || !(b1.s2 == b2.s1))
        throw InputError("compose_bridges: endpoint mismatch");
    auto require_irreducible = [](const FiniteAlgebra& alg, const Congruence& sig) {
        if (sig.is_full() || !irreducible_with_cover(alg, sig).irreducible)
            throw InputError("compose_bridges: endpoint congruence is not irreducible");
    };
    require_irreducible(b1.alg1, b1.s1);
    require_irreducible(b1.alg2, b1.s2);
    require_irreducible(b2.alg2, b2.s2);
    std::map<std::pair<Elem, Elem>, std::vector<const Quad*>> by_mid;
    for (const Quad& q : b2.quads) by_mid[{q[0], q[1]}].push_back(&q);
    Bridge out;
    out.alg1 = b1.alg1;
    out.alg2 = b2.alg2;
    out.s1 = b1.s1;
    out.s2 = b2.s2;
    for (const Quad& q : b1.quads) {
        auto it = by_mid.find({q[2], q[3]});
        if (it == by_mid.end()) continue;
        for (const Quad* r : it->second) out.quads.push_back({q[0], q[1], (*r)[2], (*r)[3]});
    }
    sort_quads(out.quads);
    BridgeCheck chk = verify_bridge(out);
    if (!chk.ok)
        throw DiagnosticError("compose_bridges: composite failed bridge axiom " +
                              std::to_string(chk.failed_axiom));
    return out;
}

// A witness that sigma is perfect linear: zeta <= D x D x Z_p with
// proj12(zeta) = sigma*, and third coordinate 0 exactly on sigma.
struct PerfectWitness {
    int prime = 0;
    std::vector<std::array<Elem, 3>> zeta;
    std::vector<int> block_of;  // sigma*-block per element
    std::vector<Elem> psi;      // per-element functional value in Z_p
};

namespace detail {

inline bool zeta_closed(const FiniteAlgebra& alg, int p,
                        const std::vector<std::array<Elem, 3>>& zeta) {
    if (zeta.empty()) return false;
    std::set<std::array<Elem, 3>> in(zeta.begin(), zeta.end());
    if ((alg.arity - 1) % p == 0 && is_affine_algebra(alg)) {
        // Maltsev suffices: the third coordinate carries z1 - z2 + z3 mod p
        for (const auto& x : zeta)
            for (const auto& y : zeta)
                for (const auto& z : zeta) {
                    std::array<Elem, 3> out{
                        maltsev(alg, x[0], y[0], z[0]), maltsev(alg, x[1], y[1], z[1]),
                        static_cast<Elem>(((x[2] - y[2] + z[2]) % p + p) % p)};
                    if (!in.count(out)) return false;
                }
        return true;
    }
    int n = alg.arity;
    std::size_t m = zeta.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<Elem> a1(n), a2(n);
    bool sym = alg.symmetric;
    while (true) {
        int zsum = 0;
        for (int i = 0; i < n; ++i) {
            a1[i] = zeta[idx[i]][0];
            a2[i] = zeta[idx[i]][1];
            zsum += zeta[idx[i]][2];
        }
        std::array<Elem, 3> out{alg.apply(a1), alg.apply(a2), static_cast<Elem>(zsum % p)};
        if (!in.count(out)) return false;
        int pos = n - 1;
        while (pos >= 0 && idx[pos] + 1 == m) --pos;
        if (pos < 0) break;
        ++idx[pos];
        std::size_t base = sym ? idx[pos] : 0;
        for (int i = pos + 1; i < n; ++i) idx[i] = base;
    }
    return true;
}

}  // namespace detail

// Builds a perfect-linear witness for sigma from a self-bridge whose tilde
// relation is linked: compose the bridge with its inverse to the relational
// fixpoint, then realize the functional from the block group structure.
// For sigma* properly below D^2 the per-block functionals are stitched by
// searching unit scalings; incoherence is an error, never a guess.
inline PerfectWitness build_perfect_witness(const FiniteAlgebra& alg, const Congruence& sigma,
                                            const Bridge& b) {
    if (!(b.alg1 == alg) || !b.self_bridge() || !(b.s1 == sigma))
        throw InputError("build_perfect_witness: bridge is not a self-bridge of sigma");
    CoverReport cov = irreducible_with_cover(alg, sigma);
    if (!cov.irreducible) throw InputError("build_perfect_witness: sigma is not irreducible");
    if (!rel_is_linked(tilde(b), alg.size))
        throw InputError("build_perfect_witness: tilde relation is not linked");

    // compose to the fixpoint of relational squaring
    Bridge rho = compose_bridges(b, inverse(b));
    RelMask t = tilde(rho);
    while (true) {
        Bridge next = compose_bridges(rho, rho);
        RelMask t2 = tilde(next);
        if (t2 == t) break;
        rho = std::move(next);
        t = t2;
    }
    if (t != rel_full(alg.size))
        throw DiagnosticError("build_perfect_witness: composite tilde did not reach D^2");

    auto cover_cong = relation_as_congruence(alg, cov.cover);
    if (!cover_cong) throw DiagnosticError("build_perfect_witness: cover is not a congruence");

    PerfectWitness w;
    w.block_of.resize(alg.size);
    w.psi.resize(alg.size);
    for (int x = 0; x < alg.size; ++x) w.block_of[x] = cover_cong->block_of[x];

    auto blocks = cover_cong->block_list();
    int p = 0;
    std::vector<std::vector<Elem>> psi_block(blocks.size());  // per original element of block
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        RestrictedAlgebra ra = restrict_algebra(alg, blocks[bi]);
        Congruence sub;
        sub.block_of.resize(ra.algebra.size);
        {
            detail::UnionFind uf(ra.algebra.size);
            for (int x = 0; x < ra.algebra.size; ++x)
                for (int y = x + 1; y < ra.algebra.size; ++y)
                    if (sigma.same(ra.embed[x], ra.embed[y])) uf.unite(x, y);
            sub = detail::normalize_partition(uf, ra.algebra.size);
        }
        FiniteAlgebra q = quotient(ra.algebra, sub);
        GroupInfo g = linear_group_structure(q);
        if (g.gens.size() != 1)
            throw DiagnosticError("build_perfect_witness: block quotient is not prime cyclic");
        if (p == 0) p = g.gen_prime[0];
        if (g.gen_prime[0] != p)
            throw DiagnosticError("build_perfect_witness: blocks over different primes");
        psi_block[bi].resize(ra.algebra.size);
        for (int x = 0; x < ra.algebra.size; ++x)
            psi_block[bi][x] = g.coords[sub.block_of[x]][0];
    }
    // search unit scalings per block making zeta a subuniverse (the block of
    // the least element is pinned to scaling 1)
    int nb = static_cast<int>(blocks.size());
    std::vector<int> unit(nb, 1);
    auto build = [&]() {
        std::vector<std::array<Elem, 3>> zeta;
        for (int bi = 0; bi < nb; ++bi) {
            const auto& blk = blocks[bi];
            for (std::size_t i = 0; i < blk.size(); ++i)
                for (std::size_t j = 0; j < blk.size(); ++j) {
                    int d = (psi_block[bi][i] - psi_block[bi][j] + p) % p;
                    d = (d * unit[bi]) % p;
                    zeta.push_back({blk[i], blk[j], static_cast<Elem>(d)});
                }
        }
        std::sort(zeta.begin(), zeta.end());
        return zeta;
    };
    std::function<bool(int)> search = [&](int bi) -> bool {
        if (bi == nb) {
            auto zeta = build();
            if (!detail::zeta_closed(alg, p, zeta)) return false;
            w.zeta = std::move(zeta);
            return true;
        }
        if (bi == 0) {
            unit[0] = 1;
            return search(1);
        }
        for (int u = 1; u < p; ++u) {
            unit[bi] = u;
            if (search(bi + 1)) return true;
        }
        return false;
    };
    if (!search(0)) throw DiagnosticError("build_perfect_witness: atlas incoherent");
    w.prime = p;
    for (int bi = 0; bi < nb; ++bi)
        for (std::size_t i = 0; i < blocks[bi].size(); ++i)
            w.psi[blocks[bi][i]] = static_cast<Elem>((psi_block[bi][i] * unit[bi]) % p);
    // invariants: zero fiber is exactly sigma, proj12 = sigma*
    for (const auto& z : w.zeta)
        if ((z[2] == 0) != sigma.same(z[0], z[1]))
            throw DiagnosticError("build_perfect_witness: zero fiber mismatch");
    RelMask proj12 = 0;
    for (const auto& z : w.zeta) proj12 |= rel_bit(z[0], z[1]);
    if (proj12 != cov.cover) throw DiagnosticError("build_perfect_witness: proj12 != cover");
    return w;
}

// The trivial self-bridge sigma(x1,x3) & sigma(x2,x4) of a proper congruence,
// optionally with the first pair restricted to a stable relation (so that the
// generated closure stays inside cover^[4]).
inline Bridge trivial_bridge(const FiniteAlgebra& alg, const Congruence& sigma, RelMask restrict_12) {
    Bridge b;
    b.alg1 = b.alg2 = alg;
    b.s1 = b.s2 = sigma;
    for (int x1 = 0; x1 < alg.size; ++x1)
        for (int x2 = 0; x2 < alg.size; ++x2) {
            if (!rel_has(restrict_12, x1, x2)) continue;
            for (int x3 = 0; x3 < alg.size; ++x3)
                for (int x4 = 0; x4 < alg.size; ++x4) {
                    if (!sigma.same(x1, x3) || !sigma.same(x2, x4)) continue;
                    b.quads.push_back({static_cast<Elem>(x1), static_cast<Elem>(x2),
                                       static_cast<Elem>(x3), static_cast<Elem>(x4)});
                }
        }
    sort_quads(b.quads);
    return b;
}

inline Bridge trivial_bridge(const FiniteAlgebra& alg, const Congruence& sigma) {
    return trivial_bridge(alg, sigma, rel_full(alg.size));
}

}  // namespace zhukcsp

#endif
