#ifndef ZHUKCSP_TERM_HPP
#define ZHUKCSP_TERM_HPP

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

#include "zhukcsp/core.hpp"

namespace zhukcsp {

// Terms over the single basic operation, stored as a DAG in an arena.
// A node is either a leaf (variable index >= 0, or a constant) or an
// application of the basic operation to exactly `arity` children.
struct TermNode {
    int var = -1;                   // >= 0: variable leaf (0-based)
    int constant = -1;              // >= 0: constant leaf
    std::vector<std::int32_t> kids; // op node: indices into the arena
    bool is_leaf() const { return kids.empty(); }
};

struct TermArena {
    std::vector<TermNode> nodes;

    std::int32_t add_var(int v) {
        nodes.push_back(TermNode{v, -1, {}});
        return static_cast<std::int32_t>(nodes.size() - 1);
    }
    std::int32_t add_const(int c) {
        nodes.push_back(TermNode{-1, c, {}});
        return static_cast<std::int32_t>(nodes.size() - 1);
    }
    std::int32_t add_op(std::vector<std::int32_t> kids) {
        nodes.push_back(TermNode{-1, -1, std::move(kids)});
        return static_cast<std::int32_t>(nodes.size() - 1);
    }
};

// A term together with its arena (value type, safe to copy/move around).
struct Term {
    TermArena arena;
    std::int32_t root = -1;

    bool valid() const { return root >= 0; }
};

// Evaluates a node for one assignment of the leaves. `apply` must accept a
// const std::vector<Elem>& of operation arguments and return Elem.
template <class ApplyFn>
Elem eval_node(const TermArena& arena, std::int32_t root, const std::vector<Elem>& assignment,
               ApplyFn&& apply) {
    std::vector<int> memo(arena.nodes.size(), -1);
    // iterative post-order to keep deep terms safe
    std::vector<std::pair<std::int32_t, std::size_t>> stack;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
        auto& [idx, ki] = stack.back();
        const TermNode& nd = arena.nodes[idx];
        if (memo[idx] >= 0) {
            stack.pop_back();
            continue;
        }
        if (nd.is_leaf()) {
            memo[idx] = nd.var >= 0 ? assignment[nd.var] : nd.constant;
            stack.pop_back();
            continue;
        }
        if (ki < nd.kids.size()) {
            std::int32_t kid = nd.kids[ki];
            ++ki;
            if (memo[kid] < 0) stack.emplace_back(kid, 0);
            continue;
        }
        std::vector<Elem> args(nd.kids.size());
        for (std::size_t j = 0; j < nd.kids.size(); ++j)
            args[j] = static_cast<Elem>(memo[nd.kids[j]]);
        memo[idx] = apply(args);
        stack.pop_back();
    }
    return static_cast<Elem>(memo[root]);
}

template <class ApplyFn>
Elem eval_term(const Term& t, const std::vector<Elem>& assignment, ApplyFn&& apply) {
    assert(t.valid());
    return eval_node(t.arena, t.root, assignment, apply);
}

// Nested prefix notation: (w t1 ... tn), leaves x1..xn (1-based) and bare constants.
inline void term_to_string_rec(const TermArena& arena, std::int32_t idx, std::string& out) {
    const TermNode& nd = arena.nodes[idx];
    if (nd.var >= 0) {
        out += "x" + std::to_string(nd.var + 1);
        return;
    }
    if (nd.constant >= 0) {
        out += std::to_string(nd.constant);
        return;
    }
    out += "(w";
    for (std::int32_t k : nd.kids) {
        out += ' ';
        term_to_string_rec(arena, k, out);
    }
    out += ')';
}

inline std::string term_to_string(const Term& t) {
    std::string out;
    term_to_string_rec(t.arena, t.root, out);
    return out;
}

inline int term_depth(const TermArena& arena, std::int32_t root) {
    std::vector<int> depth(arena.nodes.size(), -1);
    for (std::size_t i = 0; i < arena.nodes.size(); ++i) {
        const TermNode& nd = arena.nodes[i];
        if (nd.is_leaf()) {
            depth[i] = 0;
        } else {
            int d = 0;
            for (std::int32_t k : nd.kids) d = std::max(d, depth[k]);
            depth[i] = d + 1;  // kids always precede parents in our arenas
        }
    }
    return depth[root];
}

}  // namespace zhukcsp

#endif
