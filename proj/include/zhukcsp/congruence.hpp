#ifndef ZHUKCSP_CONGRUENCE_HPP
#define ZHUKCSP_CONGRUENCE_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

#include "zhukcsp/algebra.hpp"
#include "zhukcsp/core.hpp"
#include "zhukcsp/subpower.hpp"

namespace zhukcsp {

// A compatible partition of the domain. Block ids are normalized: blocks are
// numbered in order of their least member.
struct Congruence {
    std::vector<Elem> block_of;
    int blocks = 0;

    int size() const { return static_cast<int>(block_of.size()); }
    bool same(int a, int b) const { return block_of[a] == block_of[b]; }
    bool is_equality() const { return blocks == size(); }
    bool is_full() const { return blocks == 1; }

    RelMask pairs() const {
        RelMask r = 0;
        for (int a = 0; a < size(); ++a)
            for (int b = 0; b < size(); ++b)
                if (same(a, b)) r |= rel_bit(a, b);
        return r;
    }

    std::vector<std::vector<Elem>> block_list() const {
        std::vector<std::vector<Elem>> out(blocks);
        for (int a = 0; a < size(); ++a) out[block_of[a]].push_back(static_cast<Elem>(a));
        return out;
    }

    bool operator==(const Congruence& o) const { return block_of == o.block_of; }
    bool operator<(const Congruence& o) const {
        if (blocks != o.blocks) return blocks > o.blocks;  // finer first
        return block_of < o.block_of;
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        parent[b] = a;
        return true;
    }
};

inline Congruence normalize_partition(UnionFind& uf, int n) {
    Congruence c;
    c.block_of.resize(n);
    std::vector<int> label(n, -1);
    int next = 0;
    for (int a = 0; a < n; ++a) {
        int r = uf.find(a);
        if (label[r] < 0) label[r] = next++;
        c.block_of[a] = static_cast<Elem>(label[r]);
    }
    c.blocks = next;
    return c;
}

// Least congruence containing `pairs` over a generic algebra view:
// worklist of merged witness pairs, each propagated through every unary
// polynomial translation w(c_1,..,x,..,c_n).
template <class SizeFn, class ApplyFn>
Congruence cg_engine(int n_elts, int arity, SizeFn&&, ApplyFn&& apply,
                     const std::vector<std::pair<int, int>>& pairs) {
    UnionFind uf(n_elts);
    std::deque<std::pair<int, int>> work(pairs.begin(), pairs.end());
    std::vector<Elem> args(arity);
    while (!work.empty()) {
        auto [a, b] = work.front();
        work.pop_front();
        if (!uf.unite(a, b)) continue;
        // every one-variable context
        std::vector<int> consts(arity - 1, 0);
        while (true) {
            for (int pos = 0; pos < arity; ++pos) {
                int ci = 0;
                for (int i = 0; i < arity; ++i)
                    args[i] = (i == pos) ? static_cast<Elem>(a)
                                         : static_cast<Elem>(consts[ci++]);
                Elem pa = apply(args);
                ci = 0;
                for (int i = 0; i < arity; ++i)
                    args[i] = (i == pos) ? static_cast<Elem>(b)
                                         : static_cast<Elem>(consts[ci++]);
                Elem pb = apply(args);
                if (uf.find(pa) != uf.find(pb)) work.emplace_back(pa, pb);
            }
            int pos = arity - 2;
            while (pos >= 0 && consts[pos] + 1 == n_elts) --pos;
            if (pos < 0) break;
            ++consts[pos];
            for (int i = pos + 1; i < arity - 1; ++i) consts[i] = 0;
        }
    }
    return normalize_partition(uf, n_elts);
}

}  // namespace detail

// Least congruence of `alg` containing the given pairs.
inline Congruence cg(const FiniteAlgebra& alg, const std::vector<std::pair<int, int>>& pairs) {
    for (auto [a, b] : pairs)
        if (a < 0 || b < 0 || a >= alg.size || b >= alg.size)
            throw InputError("cg: pair element out of range");
    return detail::cg_engine(
        alg.size, alg.arity, [&] { return alg.size; },
        [&](const std::vector<Elem>& args) { return alg.apply(args); }, pairs);
}

// Verifies compatibility of a partition with the operation (via one-variable
// contexts, which is equivalent by the chain argument).
inline bool is_congruence(const FiniteAlgebra& alg, const Congruence& c) {
    if (c.size() != alg.size) return false;
    std::vector<std::pair<int, int>> seed;
    for (int a = 0; a < alg.size; ++a)
        for (int b = a + 1; b < alg.size; ++b)
            if (c.same(a, b)) seed.emplace_back(a, b);
    Congruence closed = cg(alg, seed);
    return closed == c;
}

inline Congruence join(const Congruence& a, const Congruence& b) {
    detail::UnionFind uf(a.size());
    for (int x = 0; x < a.size(); ++x)
        for (int y = x + 1; y < a.size(); ++y)
            if (a.same(x, y) || b.same(x, y)) uf.unite(x, y);
    return detail::normalize_partition(uf, a.size());
}

inline Congruence meet(const Congruence& a, const Congruence& b) {
    detail::UnionFind uf(a.size());
    for (int x = 0; x < a.size(); ++x)
        for (int y = x + 1; y < a.size(); ++y)
            if (a.same(x, y) && b.same(x, y)) uf.unite(x, y);
    return detail::normalize_partition(uf, a.size());
}

inline Congruence equality_congruence(int n) {
    Congruence c;
    c.block_of.resize(n);
    for (int i = 0; i < n; ++i) c.block_of[i] = static_cast<Elem>(i);
    c.blocks = n;
    return c;
}

inline Congruence full_congruence(int n) {
    Congruence c;
    c.block_of.assign(n, 0);
    c.blocks = n > 0 ? 1 : 0;
    return c;
}

// All congruences: join-closure of the principal congruences (every
// congruence is the join of the principal congruences it contains).
// Ascending by number of blocks, finest first.
inline std::vector<Congruence> all_congruences(const FiniteAlgebra& alg) {
    if (alg.size > 8) throw CapError("all_congruences: domain too large", alg.size);
    std::set<Congruence> out;
    out.insert(equality_congruence(alg.size));
    std::vector<Congruence> principals;
    for (int a = 0; a < alg.size; ++a)
        for (int b = a + 1; b < alg.size; ++b) principals.push_back(cg(alg, {{a, b}}));
    for (const Congruence& p : principals) out.insert(p);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Congruence> cur(out.begin(), out.end());
        for (const Congruence& x : cur)
            for (const Congruence& p : principals) {
                Congruence j = join(x, p);
                if (out.insert(j).second) grew = true;
            }
    }
    std::vector<Congruence> list(out.begin(), out.end());
    std::sort(list.begin(), list.end(), [](const Congruence& x, const Congruence& y) {
        if (x.blocks != y.blocks) return x.blocks < y.blocks;
        return x.block_of < y.block_of;
    });
    return list;
}

// Quotient algebra; blocks relabeled 0..m-1 in order of least member.
inline FiniteAlgebra quotient(const FiniteAlgebra& alg, const Congruence& c) {
    if (!is_congruence(alg, c)) throw InputError("quotient: partition is not a congruence");
    auto blocks = c.block_list();
    std::vector<Elem> rep(c.blocks);
    for (int b = 0; b < c.blocks; ++b) rep[b] = blocks[b][0];
    return make_algebra(c.blocks, alg.arity, [&](const std::vector<Elem>& x) {
        std::vector<Elem> lifted(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) lifted[i] = rep[x[i]];
        return c.block_of[alg.apply(lifted)];
    });
}

// --- abelianness ------------------------------------------------------------

// True iff the congruence on A^2 generated by collapsing all diagonal pairs
// has the diagonal as a single block.
inline bool is_abelian(const FiniteAlgebra& alg) {
    int k = alg.size;
    int n2 = k * k;
    auto enc = [&](int a, int b) { return a * k + b; };
    std::vector<std::pair<int, int>> seed;
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            if (a != b) seed.emplace_back(enc(a, a), enc(b, b));
    std::vector<Elem> lhs(alg.arity), rhs(alg.arity);
    Congruence theta = detail::cg_engine(
        n2, alg.arity, [&] { return n2; },
        [&](const std::vector<Elem>& args) {
            for (int i = 0; i < alg.arity; ++i) {
                lhs[i] = static_cast<Elem>(args[i] / k);
                rhs[i] = static_cast<Elem>(args[i] % k);
            }
            return static_cast<Elem>(enc(alg.apply(lhs), alg.apply(rhs)));
        },
        seed);
    int diag_block = theta.block_of[enc(0, 0)];
    for (int x = 0; x < n2; ++x) {
        bool on_diag = (x / k) == (x % k);
        if ((theta.block_of[x] == diag_block) != on_diag) return false;
    }
    return true;
}

// --- irreducibility and covers ----------------------------------------------

struct CoverReport {
    bool irreducible = false;
    RelMask cover = 0;           // on the original domain, present iff irreducible
    RelMask cover_quotient = 0;  // same relation on A/sigma
};

// sigma is irreducible iff the intersection of Sg(diagonal + one off-diagonal
// pair), taken in (A/sigma)^2 over all off-diagonal pairs, properly contains
// the diagonal; the cover sigma* is the preimage of that intersection.
inline CoverReport irreducible_with_cover(const FiniteAlgebra& alg, const Congruence& sigma) {
    if (sigma.is_full()) throw InputError("irreducible_with_cover: sigma must be proper");
    FiniteAlgebra q = quotient(alg, sigma);
    int m = q.size;
    std::vector<Tuple> diag;
    for (int a = 0; a < m; ++a) diag.push_back({static_cast<Elem>(a), static_cast<Elem>(a)});
    RelMask inter = rel_full(m);
    for (int a = 0; a < m && inter != rel_diagonal(m); ++a)
        for (int b = 0; b < m; ++b) {
            if (a == b) continue;
            std::vector<Tuple> gens = diag;
            gens.push_back({static_cast<Elem>(a), static_cast<Elem>(b)});
            Closure cl = close_tuples(q, 2, gens);
            RelMask d = 0;
            for (const Tuple& t : cl.tuples) d |= rel_bit(t[0], t[1]);
            inter &= d;
        }
    CoverReport rep;
    rep.irreducible = inter != rel_diagonal(m);
    if (rep.irreducible) {
        rep.cover_quotient = inter;
        for (int x = 0; x < alg.size; ++x)
            for (int y = 0; y < alg.size; ++y)
                if (rel_has(inter, sigma.block_of[x], sigma.block_of[y]))
                    rep.cover |= rel_bit(x, y);
    }
    return rep;
}

// Is a binary relation (as mask) a congruence of alg?
inline std::optional<Congruence> relation_as_congruence(const FiniteAlgebra& alg, RelMask r) {
    int k = alg.size;
    for (int a = 0; a < k; ++a) {
        if (!rel_has(r, a, a)) return std::nullopt;
        for (int b = 0; b < k; ++b) {
            if (rel_has(r, a, b) != rel_has(r, b, a)) return std::nullopt;
            if (!rel_has(r, a, b)) continue;
            for (int c = 0; c < k; ++c)
                if (rel_has(r, b, c) && !rel_has(r, a, c)) return std::nullopt;
        }
    }
    detail::UnionFind uf(k);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (rel_has(r, a, b)) uf.unite(a, b);
    Congruence c = detail::normalize_partition(uf, k);
    if (!is_congruence(alg, c)) return std::nullopt;
    return c;
}

// --- affine group structure ---------------------------------------------------

// Abelian group carried by an affine block algebra: zero is the least element,
// the Maltsev term w(x, y,..,y, z) yields x - y + z, and the basic operation
// must equal the n-ary sum. Decomposed into prime cyclic coordinates.
struct GroupInfo {
    Elem zero = 0;
    std::vector<std::vector<Elem>> add;
    std::vector<Elem> neg;
    std::vector<Elem> gens;          // independent generators of prime order
    std::vector<int> gen_prime;      // matching primes
    std::vector<std::vector<Elem>> coords;  // element -> coordinate vector
    int size() const { return static_cast<int>(neg.size()); }

    Elem from_coords(const std::vector<Elem>& cs) const {
        for (int e = 0; e < size(); ++e)
            if (coords[e] == cs) return static_cast<Elem>(e);
        throw DiagnosticError("group: coordinate vector out of range");
    }
};

inline Elem maltsev(const FiniteAlgebra& a, Elem x, Elem y, Elem z) {
    std::vector<Elem> args(a.arity, y);
    args[0] = x;
    args[a.arity - 1] = z;
    return a.apply(args);
}

// True when the whole algebra carries an abelian group with w the n-ary sum.
// For such algebras a set is closed under w iff it is closed under the
// Maltsev term x - y + z, which turns closure checks cubic.
inline bool is_affine_algebra(const FiniteAlgebra& alg);

// Exhaustive closure check of a set of width-k tuples under the
// coordinatewise operation, with the Maltsev shortcut for affine algebras.
inline bool tuples_closed_under_op(const FiniteAlgebra& alg, const std::vector<Tuple>& set,
                                   Tuple* witness_out = nullptr) {
    if (set.empty()) return true;
    std::set<Tuple> in(set.begin(), set.end());
    std::size_t width = set[0].size();
    if (is_affine_algebra(alg)) {
        int k = alg.size;
        std::vector<Elem> mt(static_cast<std::size_t>(k) * k * k);
        for (int x = 0; x < k; ++x)
            for (int y = 0; y < k; ++y)
                for (int z = 0; z < k; ++z)
                    mt[(x * k + y) * k + z] = maltsev(alg, static_cast<Elem>(x),
                                                      static_cast<Elem>(y), static_cast<Elem>(z));
        Tuple out(width);
        for (const Tuple& x : set)
            for (const Tuple& y : set)
                for (const Tuple& z : set) {
                    for (std::size_t w = 0; w < width; ++w)
                        out[w] = mt[(x[w] * k + y[w]) * k + z[w]];
                    if (!in.count(out)) {
                        if (witness_out) *witness_out = out;
                        return false;
                    }
                }
        return true;
    }
    int n = alg.arity;
    std::size_t m = set.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<Elem> args(n);
    Tuple out(width);
    bool sym = alg.symmetric;
    while (true) {
        for (std::size_t w = 0; w < width; ++w) {
            for (int i = 0; i < n; ++i) args[i] = set[idx[i]][w];
            out[w] = alg.apply(args);
        }
        if (!in.count(out)) {
            if (witness_out) *witness_out = out;
            return false;
        }
        int pos = n - 1;
        while (pos >= 0 && idx[pos] + 1 == m) --pos;
        if (pos < 0) break;
        ++idx[pos];
        std::size_t base = sym ? idx[pos] : 0;
        for (int i = pos + 1; i < n; ++i) idx[i] = base;
    }
    return true;
}

// Builds and exhaustively verifies the group structure. Throws
// DiagnosticError("block is not affine") when any axiom fails.
inline GroupInfo linear_group_structure(const FiniteAlgebra& alg) {
    GroupInfo g;
    int k = alg.size;
    g.zero = 0;
    g.add.assign(k, std::vector<Elem>(k));
    g.neg.assign(k, 0);
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b)
            g.add[a][b] = maltsev(alg, static_cast<Elem>(a), g.zero, static_cast<Elem>(b));
        g.neg[a] = maltsev(alg, g.zero, static_cast<Elem>(a), g.zero);
    }
    auto fail = [] { throw DiagnosticError("block is not affine"); };
    for (int a = 0; a < k; ++a) {
        if (g.add[a][g.zero] != a || g.add[g.zero][a] != a) fail();
        if (g.add[a][g.neg[a]] != g.zero) fail();
        for (int b = 0; b < k; ++b) {
            if (g.add[a][b] != g.add[b][a]) fail();
            for (int c = 0; c < k; ++c)
                if (g.add[g.add[a][b]][c] != g.add[a][g.add[b][c]]) fail();
        }
    }
    // w must be the n-ary sum in this group
    {
        std::vector<Elem> args(alg.arity, 0);
        while (true) {
            Elem s = g.zero;
            for (Elem v : args) s = g.add[s][v];
            if (alg.apply(args) != s) fail();
            int pos = alg.arity - 1;
            while (pos >= 0 && args[pos] + 1 == k) --pos;
            if (pos < 0) break;
            ++args[pos];
            int base = alg.symmetric ? args[pos] : 0;
            for (int i = pos + 1; i < alg.arity; ++i) args[i] = static_cast<Elem>(base);
        }
    }
    // greedy decomposition into prime cyclic factors: among elements of prime
    // order outside the current span, largest order first, then least element
    auto order_of = [&](Elem e) {
        int o = 1;
        Elem x = e;
        while (x != g.zero) {
            x = g.add[x][e];
            ++o;
        }
        return o;
    };
    auto is_prime = [](int v) {
        if (v < 2) return false;
        for (int d = 2; d * d <= v; ++d)
            if (v % d == 0) return false;
        return true;
    };
    std::vector<bool> in_span(k, false);
    in_span[g.zero] = true;
    int span_size = 1;
    while (span_size < k) {
        int best = -1, best_order = 0;
        for (int e = 0; e < k; ++e) {
            if (in_span[e]) continue;
            int o = order_of(static_cast<Elem>(e));
            if (!is_prime(o)) continue;
            if (o > best_order) {
                best = e;
                best_order = o;
            }
        }
        if (best < 0) fail();  // not a product of prime cyclic groups
        g.gens.push_back(static_cast<Elem>(best));
        g.gen_prime.push_back(best_order);
        std::vector<Elem> span;
        for (int e = 0; e < k; ++e)
            if (in_span[e]) span.push_back(static_cast<Elem>(e));
        for (Elem s : span) {
            Elem x = s;
            for (int i = 1; i < best_order; ++i) {
                x = g.add[x][static_cast<Elem>(best)];
                if (in_span[x]) fail();  // generator not independent of the span
                in_span[x] = true;
                ++span_size;
            }
        }
        // n == 1 (mod q) for every prime q in the decomposition
        if ((alg.arity - 1) % best_order != 0) fail();
    }
    // coordinates of every element
    g.coords.assign(k, std::vector<Elem>(g.gens.size(), 0));
    std::vector<Elem> cs(g.gens.size(), 0);
    while (true) {
        Elem e = g.zero;
        for (std::size_t i = 0; i < g.gens.size(); ++i)
            for (int rep = 0; rep < cs[i]; ++rep) e = g.add[e][g.gens[i]];
        g.coords[e] = cs;
        int pos = static_cast<int>(g.gens.size()) - 1;
        while (pos >= 0 && cs[pos] + 1 == g.gen_prime[pos]) --pos;
        if (pos < 0) break;
        ++cs[pos];
        for (std::size_t i = pos + 1; i < g.gens.size(); ++i) cs[i] = 0;
    }
    return g;
}

inline bool is_affine_algebra(const FiniteAlgebra& alg) {
    int k = alg.size;
    std::vector<std::vector<Elem>> add(k, std::vector<Elem>(k));
    std::vector<Elem> neg(k);
    Elem zero = 0;
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b)
            add[a][b] = maltsev(alg, static_cast<Elem>(a), zero, static_cast<Elem>(b));
        neg[a] = maltsev(alg, zero, static_cast<Elem>(a), zero);
    }
    for (int a = 0; a < k; ++a) {
        if (add[a][zero] != a || add[a][neg[a]] != zero) return false;
        for (int b = 0; b < k; ++b) {
            if (add[a][b] != add[b][a]) return false;
            for (int c = 0; c < k; ++c)
                if (add[add[a][b]][c] != add[a][add[b][c]]) return false;
        }
    }
    // the exponent must divide arity - 1, so an n-ary sum fixes cosets
    for (int a = 0; a < k; ++a) {
        Elem x = zero;
        for (int i = 0; i < alg.arity - 1; ++i) x = add[x][static_cast<Elem>(a)];
        if (x != zero) return false;
    }
    // w must be the n-ary sum in this group
    std::vector<Elem> args(alg.arity, 0);
    while (true) {
        Elem s = zero;
        for (Elem v : args) s = add[s][v];
        if (alg.apply(args) != s) return false;
        int pos = alg.arity - 1;
        while (pos >= 0 && args[pos] + 1 == k) --pos;
        if (pos < 0) break;
        ++args[pos];
        int base = alg.symmetric ? args[pos] : 0;
        for (int i = pos + 1; i < alg.arity; ++i) args[i] = static_cast<Elem>(base);
    }
    return true;
}

}  // namespace zhukcsp

#endif
