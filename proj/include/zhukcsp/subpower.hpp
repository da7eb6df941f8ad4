#ifndef ZHUKCSP_SUBPOWER_HPP
#define ZHUKCSP_SUBPOWER_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "zhukcsp/algebra.hpp"
#include "zhukcsp/core.hpp"
#include "zhukcsp/term.hpp"

namespace zhukcsp {

struct ClosureCaps {
    std::size_t max_tuples = 1'000'000;
    std::uint64_t max_applications = 400'000'000;
};

// Result of generating a subalgebra of a power: the tuples in BFS insertion
// order (generators first), with optional term provenance. term_var[i] >= 0
// marks tuple i as the term_var[i]-th generator; otherwise term_args[i] lists
// the argument tuple indices of one operation application producing it.
struct Closure {
    std::size_t width = 0;
    std::vector<Tuple> tuples;
    std::vector<int> term_var;
    std::vector<std::vector<std::int32_t>> term_args;
    std::vector<int> generation;
    bool capped = false;
    std::size_t count_reached = 0;
    std::optional<std::size_t> stopped_at;  // index of the tuple that satisfied the stop predicate

    bool contains(const Tuple& t) const {
        for (const Tuple& u : tuples)
            if (u == t) return true;
        return false;
    }
};

// Extracts a standalone Term for one closure element. Generator i becomes
// variable leaf x_{i+1}.
inline Term extract_term(const Closure& c, std::size_t index) {
    Term t;
    std::vector<std::int32_t> map(c.tuples.size(), -1);
    std::vector<std::size_t> order;
    std::vector<std::size_t> stack{index};
    std::vector<bool> seen(c.tuples.size(), false);
    while (!stack.empty()) {  // collect reachable nodes
        std::size_t i = stack.back();
        stack.pop_back();
        if (seen[i]) continue;
        seen[i] = true;
        order.push_back(i);
        for (std::int32_t k : c.term_args[i]) stack.push_back(static_cast<std::size_t>(k));
    }
    std::sort(order.begin(), order.end());  // kids precede parents (BFS indices increase)
    for (std::size_t i : order) {
        if (c.term_var[i] >= 0) {
            map[i] = t.arena.add_var(c.term_var[i]);
        } else if (c.term_args[i].empty()) {
            map[i] = t.arena.add_const(c.tuples[i].empty() ? 0 : c.tuples[i][0]);
        } else {
            std::vector<std::int32_t> kids;
            kids.reserve(c.term_args[i].size());
            for (std::int32_t k : c.term_args[i]) kids.push_back(map[k]);
            map[i] = t.arena.add_op(std::move(kids));
        }
    }
    t.root = map[index];
    return t;
}

namespace detail {

// Generates the closure of `generators` under one n-ary operation applied
// coordinatewise. ApplyFn: (const std::vector<const Tuple*>&, Tuple& out).
// When `symmetric` is set only non-decreasing argument index tuples are
// enumerated (sound when the operation table is invariant under argument
// permutations). Every round enumerates only argument tuples touching the
// previous round's frontier, so total work telescopes to |closure|^n.
template <class ApplyFn>
Closure close_generic(std::size_t width, int n, const std::vector<Tuple>& generators, bool symmetric,
                      bool provenance, const ClosureCaps& caps,
                      const std::function<bool(const Tuple&)>& stop, ApplyFn&& apply_op) {
    Closure c;
    c.width = width;
    std::unordered_map<Tuple, std::int32_t, TupleHash> index;
    auto insert = [&](const Tuple& t, int var, const std::vector<std::int32_t>* args, int gen) -> int {
        auto [it, fresh] = index.emplace(t, static_cast<std::int32_t>(c.tuples.size()));
        if (!fresh) return -1;
        c.tuples.push_back(t);
        c.term_var.push_back(var);
        c.term_args.push_back(provenance && args ? *args : std::vector<std::int32_t>{});
        c.generation.push_back(gen);
        return static_cast<int>(c.tuples.size() - 1);
    };

    for (std::size_t g = 0; g < generators.size(); ++g) {
        if (generators[g].size() != width) throw InputError("generator width mismatch");
        int at = insert(generators[g], static_cast<int>(g), nullptr, 0);
        if (at >= 0 && stop && stop(generators[g])) {
            c.stopped_at = static_cast<std::size_t>(at);
            c.count_reached = c.tuples.size();
            return c;
        }
    }

    std::uint64_t budget = caps.max_applications;
    std::vector<std::int32_t> idx(n);
    std::vector<const Tuple*> args(n);
    Tuple out(width);
    std::size_t old = 0;
    int round = 0;
    while (old < c.tuples.size()) {
        std::size_t frontier = old;
        old = c.tuples.size();
        ++round;
        // enumerate argument index tuples with at least one index >= frontier
        // (for the symmetric path: non-decreasing with max >= frontier)
        std::size_t m = old;
        auto run_tuple = [&]() -> bool {  // returns false on cap/stop
            if (budget-- == 0) {
                c.capped = true;
                return false;
            }
            for (int i = 0; i < n; ++i) args[i] = &c.tuples[idx[i]];
            for (std::size_t w = 0; w < width; ++w) out[w] = 0;
            apply_op(args, out);
            int at = insert(out, -1, nullptr, round);
            if (at >= 0) {
                if (provenance) c.term_args[at] = std::vector<std::int32_t>(idx.begin(), idx.end());
                if (c.tuples.size() > caps.max_tuples) {
                    c.capped = true;
                    return false;
                }
                if (stop && stop(out)) {
                    c.stopped_at = static_cast<std::size_t>(at);
                    return false;
                }
            }
            return true;
        };

        if (symmetric) {
            // non-decreasing idx with idx[n-1] >= frontier
            for (int i = 0; i < n; ++i) idx[i] = 0;
            idx[n - 1] = static_cast<std::int32_t>(frontier);
            while (true) {
                if (!run_tuple()) {
                    c.count_reached = c.tuples.size();
                    return c;
                }
                int pos = n - 1;
                while (pos >= 0 && idx[pos] + 1 >= static_cast<std::int32_t>(m)) --pos;
                if (pos < 0) break;
                ++idx[pos];
                for (int i = pos + 1; i < n; ++i) idx[i] = idx[pos];
                if (idx[n - 1] < static_cast<std::int32_t>(frontier))
                    idx[n - 1] = static_cast<std::int32_t>(frontier);
            }
        } else {
            // Split by the first position holding a frontier index: earlier
            // positions range over old tuples only, that position over the
            // frontier, later positions over everything.
            for (int fresh = 0; fresh < n; ++fresh) {
                if (fresh > 0 && frontier == 0) break;  // no old tuples to fill earlier slots
                for (int i = 0; i < n; ++i) idx[i] = 0;
                idx[fresh] = static_cast<std::int32_t>(frontier);
                bool done = false;
                while (!done) {
                    if (!run_tuple()) {
                        c.count_reached = c.tuples.size();
                        return c;
                    }
                    int pos = n - 1;
                    for (;; --pos) {
                        if (pos < 0) {
                            done = true;
                            break;
                        }
                        std::int32_t lim = (pos < fresh) ? static_cast<std::int32_t>(frontier)
                                                         : static_cast<std::int32_t>(m);
                        if (idx[pos] + 1 < lim) {
                            ++idx[pos];
                            for (int i = pos + 1; i < n; ++i)
                                idx[i] = (i == fresh) ? static_cast<std::int32_t>(frontier) : 0;
                            break;
                        }
                    }
                }
            }
        }
    }
    c.count_reached = c.tuples.size();
    return c;
}

}  // namespace detail

// Closure of k-tuples under the coordinatewise basic operation of one algebra.
inline Closure close_tuples(const FiniteAlgebra& alg, std::size_t width,
                            const std::vector<Tuple>& generators, bool provenance = false,
                            const ClosureCaps& caps = {},
                            const std::function<bool(const Tuple&)>& stop = nullptr) {
    std::vector<Elem> buf(alg.arity);
    return detail::close_generic(
        width, alg.arity, generators, alg.symmetric, provenance, caps, stop,
        [&](const std::vector<const Tuple*>& args, Tuple& out) {
            for (std::size_t w = 0; w < out.size(); ++w) {
                for (int i = 0; i < alg.arity; ++i) buf[i] = (*args[i])[w];
                out[w] = alg.apply(buf);
            }
        });
}

// A subset of A^k closed under the coordinatewise operation, with optional
// generation provenance.
struct Subpower {
    int power = 0;
    Closure closure;

    const std::vector<Tuple>& tuples() const { return closure.tuples; }
    std::vector<Tuple> sorted_tuples() const {
        std::vector<Tuple> out = closure.tuples;
        std::sort(out.begin(), out.end());
        return out;
    }
    bool contains(const Tuple& t) const { return closure.contains(t); }
    Term term_for(std::size_t index) const { return extract_term(closure, index); }
};

// Sg_A(generators) in A^power.
inline Subpower sg_generate(const FiniteAlgebra& alg, int power, const std::vector<Tuple>& generators,
                            bool with_provenance = false, const ClosureCaps& caps = {}) {
    if (power < 1) throw InputError("sg_generate: power must be >= 1");
    for (const Tuple& g : generators)
        for (Elem e : g)
            if (e >= alg.size) throw InputError("sg_generate: generator entry out of range");
    Subpower s;
    s.power = power;
    s.closure = close_tuples(alg, static_cast<std::size_t>(power), generators, with_provenance, caps);
    if (s.closure.capped) throw CapError("sg_generate: closure cap exceeded", s.closure.count_reached);
    return s;
}

// The k-ary part of the clone (optionally with constants): closure of the k
// projections under composition by the basic operation, each element stored
// as an operation table of length size^k.
inline Subpower free_ops(const FiniteAlgebra& alg, int k, bool constants = false,
                         const ClosureCaps& caps = {}, std::size_t max_power = 32) {
    std::uint64_t len = ipow(alg.size, static_cast<unsigned>(k));
    if (len > max_power) throw InputError("free_ops: size^k exceeds the allowed power");
    std::vector<Tuple> gens;
    std::vector<Elem> args(k);
    for (int j = 0; j < k; ++j) {
        Tuple proj(len);
        for (std::size_t idx = 0; idx < len; ++idx) {
            detail::decode_args(idx, alg.size, k, args);
            proj[idx] = args[j];
        }
        gens.push_back(std::move(proj));
    }
    if (constants)
        for (int c = 0; c < alg.size; ++c) gens.push_back(Tuple(len, static_cast<Elem>(c)));
    Subpower s;
    s.power = static_cast<int>(len);
    s.closure = close_tuples(alg, len, gens, true, caps);
    if (s.closure.capped) throw CapError("free_ops: closure cap exceeded", s.closure.count_reached);
    return s;
}

// Interprets a free_ops element as a k-ary algebra over the same domain.
inline FiniteAlgebra table_as_algebra(const FiniteAlgebra& base, int k, const Tuple& table) {
    FiniteAlgebra a;
    a.size = base.size;
    a.arity = k;
    a.table = table;
    compute_flags(a);
    return a;
}

struct SpecializeResult {
    FiniteAlgebra algebra;
    Term term;  // over the n projections of the original algebra
};

// Returns `alg` unchanged if it already satisfies the special identity;
// otherwise searches the n-ary part of the clone for an idempotent special
// WNU table. The search can fail: there need not be one of the same arity.
inline SpecializeResult specialize(const FiniteAlgebra& alg, const ClosureCaps& caps = {}) {
    if (!alg.wnu) throw InputError("specialize: operation is not a WNU");
    if (alg.special) {
        SpecializeResult r;
        r.algebra = alg;
        Term t;
        std::vector<std::int32_t> kids;
        for (int j = 0; j < alg.arity; ++j) kids.push_back(t.arena.add_var(j));
        t.root = t.arena.add_op(std::move(kids));
        r.term = std::move(t);
        return r;
    }
    std::uint64_t len = ipow(alg.size, static_cast<unsigned>(alg.arity));
    Subpower ops = free_ops(alg, alg.arity, false, caps, /*max_power=*/len);
    for (std::size_t i = 0; i < ops.tuples().size(); ++i) {
        FiniteAlgebra cand = table_as_algebra(alg, alg.arity, ops.tuples()[i]);
        if (cand.idempotent && cand.wnu && cand.special) {
            SpecializeResult r;
            r.algebra = std::move(cand);
            r.term = ops.term_for(i);
            return r;
        }
    }
    throw CapError("specialize: no special WNU of this arity found in the clone",
                   ops.tuples().size());
}

}  // namespace zhukcsp

#endif
