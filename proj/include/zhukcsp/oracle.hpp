#ifndef ZHUKCSP_ORACLE_HPP
#define ZHUKCSP_ORACLE_HPP

#include <cstdint>
#include <vector>

#include "zhukcsp/csp.hpp"

namespace zhukcsp {

enum class OracleMode { First, Count, All };

struct OracleResult {
    bool sat = false;
    std::uint64_t count = 0;
    std::vector<std::vector<Elem>> solutions;  // First: at most one; All: every one
};

// Exhaustive backtracking in declaration/ascending order with forward
// checking; no clever pruning, so the oracle stays auditable.
inline OracleResult brute_force(const Instance& inst, OracleMode mode = OracleMode::First,
                                std::uint64_t cap_product = 100'000'000ull) {
    int nv = static_cast<int>(inst.vars.size());
    std::uint64_t product = 1;
    for (const Variable& v : inst.vars) {
        product *= v.domain.size();
        if (product > cap_product)
            throw CapError("brute_force: assignment space exceeds cap",
                           static_cast<std::size_t>(cap_product));
    }
    OracleResult res;
    std::vector<std::uint32_t> cand(nv);
    for (int x = 0; x < nv; ++x) {
        cand[x] = 0;
        for (Elem e : inst.vars[x].domain) cand[x] |= 1u << e;
    }
    std::vector<Elem> assign(nv, 0);

    // forward check: prune candidate values of unassigned scope variables
    auto prune = [&](int depth, std::vector<std::uint32_t>& masks) -> bool {
        for (const Constraint& c : inst.constraints) {
            bool relevant = false;
            for (int v : c.scope)
                if (v >= depth) relevant = true;
            std::vector<std::uint32_t> support(c.scope.size(), 0);
            for (const Tuple& t : c.tuples) {
                bool compatible = true;
                for (std::size_t i = 0; i < c.scope.size() && compatible; ++i) {
                    int v = c.scope[i];
                    if (v < depth) {
                        if (t[i] != assign[v]) compatible = false;
                    } else if (!((masks[v] >> t[i]) & 1)) {
                        compatible = false;
                    }
                }
                if (compatible)
                    for (std::size_t i = 0; i < c.scope.size(); ++i) support[i] |= 1u << t[i];
            }
            bool any = false;
            for (std::size_t i = 0; i < c.scope.size(); ++i)
                if (support[i]) any = true;
            if (!any) return false;  // no tuple compatible at all
            for (std::size_t i = 0; i < c.scope.size(); ++i) {
                int v = c.scope[i];
                if (v >= depth) {
                    masks[v] &= support[i];
                    if (masks[v] == 0) return false;
                }
            }
            (void)relevant;
        }
        return true;
    };

    std::vector<std::vector<std::uint32_t>> mask_stack(nv + 1);
    mask_stack[0] = cand;
    if (!prune(0, mask_stack[0])) return res;

    int depth = 0;
    std::vector<int> value_at(nv, -1);
    while (depth >= 0) {
        if (depth == nv) {
            res.sat = true;
            ++res.count;
            if (mode == OracleMode::First) {
                res.solutions.push_back(assign);
                return res;
            }
            if (mode == OracleMode::All) res.solutions.push_back(assign);
            --depth;
            continue;
        }
        bool advanced = false;
        for (int v = value_at[depth] + 1; v < inst.algebra->size; ++v) {
            if (!((mask_stack[depth][depth] >> v) & 1)) continue;
            value_at[depth] = v;
            assign[depth] = static_cast<Elem>(v);
            mask_stack[depth + 1] = mask_stack[depth];
            mask_stack[depth + 1][depth] = 1u << v;
            if (prune(depth + 1, mask_stack[depth + 1])) {
                ++depth;
                if (depth < nv) value_at[depth] = -1;
                advanced = true;
            }
            if (advanced) break;
        }
        if (!advanced) {
            value_at[depth] = -1;
            --depth;
        }
    }
    return res;
}

// Extensional satisfaction check of a full assignment.
inline bool satisfies(const Instance& inst, const std::vector<Elem>& assign) {
    for (std::size_t x = 0; x < inst.vars.size(); ++x) {
        bool in = false;
        for (Elem e : inst.vars[x].domain)
            if (e == assign[x]) in = true;
        if (!in) return false;
    }
    for (const Constraint& c : inst.constraints) {
        bool hit = false;
        for (const Tuple& t : c.tuples) {
            bool eq = true;
            for (std::size_t i = 0; i < c.scope.size(); ++i)
                if (t[i] != assign[c.scope[i]]) eq = false;
            if (eq) hit = true;
        }
        if (!hit) return false;
    }
    return true;
}

}  // namespace zhukcsp

#endif
