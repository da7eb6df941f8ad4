#ifndef ZHUKCSP_CLASSIFY_HPP
#define ZHUKCSP_CLASSIFY_HPP

#include <optional>
#include <vector>

#include "zhukcsp/bridge.hpp"
#include "zhukcsp/congruence.hpp"

namespace zhukcsp {

enum class IrrClass { Linear, PC };

struct IrreducibleReport {
    bool irreducible = false;
    RelMask cover = 0;
    IrrClass cls = IrrClass::PC;
    int prime = 0;       // for Linear
    Bridge bridge;       // for Linear: verified, with tilde == cover
};

namespace detail {

// Per-block quotient structure for the cover congruence.
struct BlockStructure {
    std::vector<Elem> elements;      // original labels
    std::vector<int> qlabel;         // per element: label in B/sigma
    GroupInfo group;                 // on B/sigma
};

inline std::optional<std::vector<BlockStructure>> block_structures(const FiniteAlgebra& alg,
                                                                   const Congruence& sigma,
                                                                   const Congruence& cover,
                                                                   int& prime_out) {
    std::vector<BlockStructure> out;
    int prime = 0;
    for (const auto& blk : cover.block_list()) {
        RestrictedAlgebra ra = restrict_algebra(alg, blk);
        UnionFind uf(ra.algebra.size);
        for (int x = 0; x < ra.algebra.size; ++x)
            for (int y = x + 1; y < ra.algebra.size; ++y)
                if (sigma.same(ra.embed[x], ra.embed[y])) uf.unite(x, y);
        Congruence sub = normalize_partition(uf, ra.algebra.size);
        FiniteAlgebra q = quotient(ra.algebra, sub);
        if (q.size > 1 && !is_abelian(q)) return std::nullopt;  // condition (b)
        BlockStructure bs;
        bs.elements = blk;
        bs.qlabel.resize(ra.algebra.size);
        for (int x = 0; x < ra.algebra.size; ++x) bs.qlabel[x] = sub.block_of[x];
        if (q.size > 1) {
            try {
                bs.group = linear_group_structure(q);
            } catch (const DiagnosticError&) {
                return std::nullopt;
            }
            for (int gp : bs.group.gen_prime) {
                if (prime == 0) prime = gp;
                if (gp != prime) return std::nullopt;  // condition (c): one common prime
            }
        } else {
            bs.group = linear_group_structure(q);  // trivial group
        }
        out.push_back(std::move(bs));
    }
    prime_out = prime;
    return out;
}

// The union over cover-blocks of the graph of x1 - x2 = x3 - x4, differences
// taken in the block quotient group.
inline std::vector<Quad> difference_bridge_quads(const std::vector<BlockStructure>& bs) {
    std::vector<Quad> quads;
    for (const BlockStructure& b : bs) {
        std::size_t m = b.elements.size();
        const GroupInfo& g = b.group;
        for (std::size_t i1 = 0; i1 < m; ++i1)
            for (std::size_t i2 = 0; i2 < m; ++i2)
                for (std::size_t i3 = 0; i3 < m; ++i3)
                    for (std::size_t i4 = 0; i4 < m; ++i4) {
                        Elem d1 = g.add[b.qlabel[i1]][g.neg[b.qlabel[i2]]];
                        Elem d2 = g.add[b.qlabel[i3]][g.neg[b.qlabel[i4]]];
                        if (d1 == d2)
                            quads.push_back({b.elements[i1], b.elements[i2], b.elements[i3],
                                             b.elements[i4]});
                    }
    }
    sort_quads(quads);
    return quads;
}

}  // namespace detail

// Linear/PC dichotomy for an irreducible congruence with known cover. Linear
// verdicts always carry a machine-checked bridge; the abelian-block
// construction is tried first and a bounded bridge search (seeded inside
// cover^[4]) is the fallback.
inline IrreducibleReport classify_irreducible(const FiniteAlgebra& alg, const Congruence& sigma,
                                              RelMask cover, const ClosureCaps& caps = {}) {
    IrreducibleReport rep;
    rep.irreducible = true;
    rep.cover = cover;

    auto cover_cong = relation_as_congruence(alg, cover);  // condition (a)
    if (!cover_cong) {
        rep.cls = IrrClass::PC;
        return rep;
    }
    int prime = 0;
    auto bs = detail::block_structures(alg, sigma, *cover_cong, prime);
    if (!bs) {
        rep.cls = IrrClass::PC;
        return rep;
    }
    if (prime == 0) throw DiagnosticError("classify_irreducible: cover equals sigma");

    Bridge cand;
    cand.alg1 = cand.alg2 = alg;
    cand.s1 = cand.s2 = sigma;
    cand.quads = detail::difference_bridge_quads(*bs);
    BridgeCheck chk = verify_bridge(cand);
    if (chk.ok && tilde(cand) == cover) {
        rep.cls = IrrClass::Linear;
        rep.prime = prime;
        rep.bridge = std::move(cand);
        return rep;
    }

    // fallback: bounded search over seeds (a,a,b,b) with (a,b) in cover minus
    // sigma, closed under w and sigma-saturation together with the restricted
    // trivial bridge
    Bridge base = trivial_bridge(alg, sigma, cover);
    for (int a = 0; a < alg.size; ++a)
        for (int b = 0; b < alg.size; ++b) {
            if (!rel_has(cover, a, b) || sigma.same(a, b)) continue;
            std::vector<Tuple> gens;
            for (const Quad& q : base.quads) gens.push_back({q[0], q[1], q[2], q[3]});
            gens.push_back({static_cast<Elem>(a), static_cast<Elem>(a), static_cast<Elem>(b),
                            static_cast<Elem>(b)});
            // alternate subalgebra generation with sigma-saturation to fixpoint
            std::size_t before = 0;
            Closure cl;
            while (true) {
                cl = close_tuples(alg, 4, gens, false, caps);
                if (cl.capped)
                    throw CapError("classify_irreducible: classification undecided",
                                   cl.count_reached);
                std::set<Tuple> sat(cl.tuples.begin(), cl.tuples.end());
                for (const Tuple& t : cl.tuples)
                    for (int y1 = 0; y1 < alg.size; ++y1)
                        for (int y2 = 0; y2 < alg.size; ++y2)
                            for (int y3 = 0; y3 < alg.size; ++y3)
                                for (int y4 = 0; y4 < alg.size; ++y4)
                                    if (sigma.same(t[0], y1) && sigma.same(t[1], y2) &&
                                        sigma.same(t[2], y3) && sigma.same(t[3], y4))
                                        sat.insert({static_cast<Elem>(y1), static_cast<Elem>(y2),
                                                    static_cast<Elem>(y3), static_cast<Elem>(y4)});
                if (sat.size() == before) break;
                before = sat.size();
                gens.assign(sat.begin(), sat.end());
            }
            Bridge c2;
            c2.alg1 = c2.alg2 = alg;
            c2.s1 = c2.s2 = sigma;
            for (const Tuple& t : cl.tuples) c2.quads.push_back({t[0], t[1], t[2], t[3]});
            sort_quads(c2.quads);
            BridgeCheck chk2 = verify_bridge(c2);
            RelMask tl = tilde(c2);
            if (chk2.ok && tl == cover && (tl & ~sigma.pairs()) != 0) {
                rep.cls = IrrClass::Linear;
                rep.prime = prime;
                rep.bridge = std::move(c2);
                return rep;
            }
        }
    rep.cls = IrrClass::PC;
    return rep;
}

inline IrreducibleReport analyze_congruence(const FiniteAlgebra& alg, const Congruence& sigma,
                                            const ClosureCaps& caps = {}) {
    CoverReport cov = irreducible_with_cover(alg, sigma);
    if (!cov.irreducible) return IrreducibleReport{};
    return classify_irreducible(alg, sigma, cov.cover, caps);
}

struct MinimalLinearResult {
    Congruence sigma;                      // meet of all linear congruences with full cover
    std::vector<Congruence> linears;       // the congruences that were met
    std::vector<IrreducibleReport> reports;
};

// Meet of all linear congruences with cover D^2; the full congruence when
// there are none.
inline MinimalLinearResult minimal_full_linear(const FiniteAlgebra& alg,
                                               const ClosureCaps& caps = {}) {
    MinimalLinearResult res;
    res.sigma = full_congruence(alg.size);
    for (const Congruence& c : all_congruences(alg)) {
        if (c.is_full()) continue;
        CoverReport cov = irreducible_with_cover(alg, c);
        if (!cov.irreducible || cov.cover != rel_full(alg.size)) continue;
        IrreducibleReport rep = classify_irreducible(alg, c, cov.cover, caps);
        if (rep.cls == IrrClass::Linear) {
            res.sigma = meet(res.sigma, c);
            res.linears.push_back(c);
            res.reports.push_back(std::move(rep));
        }
    }
    return res;
}

}  // namespace zhukcsp

#endif
