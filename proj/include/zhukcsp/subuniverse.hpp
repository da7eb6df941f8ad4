#ifndef ZHUKCSP_SUBUNIVERSE_HPP
#define ZHUKCSP_SUBUNIVERSE_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "zhukcsp/classify.hpp"
#include "zhukcsp/congruence.hpp"
#include "zhukcsp/subpower.hpp"
#include "zhukcsp/term.hpp"

namespace zhukcsp {

// All nonempty subsets closed under the operation, ascending by size then
// lexicographically.
inline std::vector<std::vector<Elem>> enumerate_subuniverses(const FiniteAlgebra& alg) {
    if (alg.size > 8) throw CapError("enumerate_subuniverses: domain too large", alg.size);
    std::vector<std::vector<Elem>> out;
    for (unsigned mask = 1; mask < (1u << alg.size); ++mask) {
        std::vector<Elem> b;
        for (int e = 0; e < alg.size; ++e)
            if ((mask >> e) & 1) b.push_back(static_cast<Elem>(e));
        if (is_closed_subset(alg, b)) out.push_back(std::move(b));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return x < y;
    });
    return out;
}

struct AbsorptionResult {
    bool absorbing = false;
    Term witness;                       // binary witness term (BA only)
    Tuple witness_table;                // its operation table
    std::vector<Tuple> counterwitness;  // the generator tuples whose Sg misses B^n
};

namespace detail {

inline bool in_set(const std::vector<Elem>& b, Elem e) {
    return std::find(b.begin(), b.end(), e) != b.end();
}

// Decision core shared by the binary and ternary absorption tests: B absorbs
// with an n-ary term iff every Sg generated from one witness tuple per slot
// pattern (B..B,A,B..B) meets B^n.
inline std::optional<std::vector<Tuple>> absorption_counterwitness(const FiniteAlgebra& alg,
                                                                   const std::vector<Elem>& b,
                                                                   int n,
                                                                   const ClosureCaps& caps) {
    std::vector<Tuple> gens(n);
    auto stop_in_cube = [&](const Tuple& t) {
        for (Elem e : t)
            if (!in_set(b, e)) return false;
        return true;
    };
    // odometer over one A-position value and B-values elsewhere, per slot
    std::vector<int> choice(n * n, 0);  // choice[i*n+j]: value index for generator i, coord j
    auto value_count = [&](int i, int j) {
        return i == j ? alg.size : static_cast<int>(b.size());
    };
    while (true) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                int v = choice[i * n + j];
                gens[i].resize(n);
                gens[i][j] = (i == j) ? static_cast<Elem>(v) : b[v];
            }
        Closure cl = close_tuples(alg, n, gens, false, caps, stop_in_cube);
        if (cl.capped) throw CapError("absorption test: closure cap exceeded", cl.count_reached);
        if (!cl.stopped_at.has_value()) return gens;  // Sg misses B^n
        int pos = n * n - 1;
        while (pos >= 0 && choice[pos] + 1 == value_count(pos / n, pos % n)) --pos;
        if (pos < 0) break;
        ++choice[pos];
        for (int i = pos + 1; i < n * n; ++i) choice[i] = 0;
    }
    return std::nullopt;
}

}  // namespace detail

// B is binary absorbing iff for every u in B x A and v in A x B the
// subalgebra generated by {u, v} meets B^2; the witness term is surfaced by
// scanning the binary part of the clone.
inline AbsorptionResult is_binary_absorbing(const FiniteAlgebra& alg, const std::vector<Elem>& b,
                                            const ClosureCaps& caps = {}) {
    AbsorptionResult res;
    auto cw = detail::absorption_counterwitness(alg, b, 2, caps);
    if (cw) {
        res.counterwitness = *cw;
        return res;
    }
    res.absorbing = true;
    Subpower ops = free_ops(alg, 2, false, caps);
    for (std::size_t i = 0; i < ops.tuples().size(); ++i) {
        const Tuple& t = ops.tuples()[i];
        bool good = true;
        for (Elem x : b) {
            for (int a = 0; a < alg.size && good; ++a) {
                if (!detail::in_set(b, t[x * alg.size + a])) good = false;
                if (!detail::in_set(b, t[a * alg.size + x])) good = false;
            }
            if (!good) break;
        }
        if (good) {
            res.witness = ops.term_for(i);
            res.witness_table = t;
            return res;
        }
    }
    throw DiagnosticError("is_binary_absorbing: criterion passed but no witness term found");
}

inline AbsorptionResult is_ternary_absorbing(const FiniteAlgebra& alg, const std::vector<Elem>& b,
                                             const ClosureCaps& caps = {}) {
    AbsorptionResult res;
    auto cw = detail::absorption_counterwitness(alg, b, 3, caps);
    if (cw) {
        res.counterwitness = *cw;
        return res;
    }
    res.absorbing = true;
    return res;
}

// Central: ternary absorbing and (a,a) outside Sg(({a} x B) u (B x {a})) for
// every a outside B.
inline bool is_central(const FiniteAlgebra& alg, const std::vector<Elem>& b,
                       const ClosureCaps& caps = {}) {
    if (!is_ternary_absorbing(alg, b, caps).absorbing) return false;
    for (int a = 0; a < alg.size; ++a) {
        if (detail::in_set(b, static_cast<Elem>(a))) continue;
        std::vector<Tuple> gens;
        for (Elem x : b) {
            gens.push_back({static_cast<Elem>(a), x});
            gens.push_back({x, static_cast<Elem>(a)});
        }
        Tuple diag{static_cast<Elem>(a), static_cast<Elem>(a)};
        Closure cl = close_tuples(alg, 2, gens, false, caps,
                                  [&](const Tuple& t) { return t == diag; });
        if (cl.capped) throw CapError("is_central: closure cap exceeded", cl.count_reached);
        if (cl.stopped_at.has_value()) return false;
    }
    return true;
}

enum class StrongKind { BA, Central, PCBlock, LinearOnly, None };

struct StrongFinding {
    StrongKind kind = StrongKind::None;
    std::vector<Elem> subset;              // BA / Central / PCBlock
    Term witness;                          // BA witness term
    std::optional<Congruence> congruence;  // PCBlock: the PC congruence used
    std::vector<Congruence> linears;       // LinearOnly: all with cover = D^2
};

// Strong-subuniverse search on one domain algebra, in priority order:
// binary absorbing, central, a block of a PC congruence with full cover,
// otherwise the list of linear congruences with full cover. A multi-element
// domain where all cases fail contradicts the ubiquity guarantee for domains
// the solver reaches, so that raises a diagnostic.
inline StrongFinding find_strong_subuniverse(const FiniteAlgebra& alg,
                                             const ClosureCaps& caps = {}) {
    StrongFinding f;
    if (alg.size <= 1) {
        f.kind = StrongKind::None;
        return f;
    }
    auto subs = enumerate_subuniverses(alg);
    for (const auto& b : subs) {
        if (static_cast<int>(b.size()) == alg.size) continue;
        AbsorptionResult r = is_binary_absorbing(alg, b, caps);
        if (r.absorbing) {
            f.kind = StrongKind::BA;
            f.subset = b;
            f.witness = std::move(r.witness);
            return f;
        }
    }
    for (const auto& b : subs) {
        if (static_cast<int>(b.size()) == alg.size) continue;
        if (is_central(alg, b, caps)) {
            f.kind = StrongKind::Central;
            f.subset = b;
            return f;
        }
    }
    for (const Congruence& c : all_congruences(alg)) {
        if (c.is_full()) continue;
        CoverReport cov = irreducible_with_cover(alg, c);
        if (!cov.irreducible || cov.cover != rel_full(alg.size)) continue;
        IrreducibleReport rep = classify_irreducible(alg, c, cov.cover, caps);
        if (rep.cls == IrrClass::PC) {
            f.kind = StrongKind::PCBlock;
            f.congruence = c;
            f.subset = c.block_list()[c.block_of[0]];  // block of the least member
            return f;
        }
        f.linears.push_back(c);
    }
    if (!f.linears.empty()) {
        f.kind = StrongKind::LinearOnly;
        return f;
    }
    throw DiagnosticError("ubiquity violated: no strong subuniverse on a multi-element domain");
}

}  // namespace zhukcsp

#endif
