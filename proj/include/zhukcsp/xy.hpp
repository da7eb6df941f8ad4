#ifndef ZHUKCSP_XY_HPP
#define ZHUKCSP_XY_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "zhukcsp/algebra.hpp"
#include "zhukcsp/subpower.hpp"
#include "zhukcsp/subuniverse.hpp"
#include "zhukcsp/term.hpp"

namespace zhukcsp {

// Symmetric on every tuple with exactly two distinct values.
inline bool check_xy_symmetric(const FiniteAlgebra& op) {
    std::vector<Elem> args(op.arity), sorted(op.arity);
    for (std::size_t idx = 0; idx < op.table.size(); ++idx) {
        detail::decode_args(idx, op.size, op.arity, args);
        std::set<Elem> vals(args.begin(), args.end());
        if (vals.size() != 2) continue;
        sorted = args;
        std::sort(sorted.begin(), sorted.end());
        if (op.table[idx] != op.apply(sorted)) return false;
    }
    return true;
}

// Symmetric on tuples with exactly k copies of the second value.
inline bool check_k_wnu(const FiniteAlgebra& op, int k) {
    if (k < 1 || k >= op.arity) throw InputError("check_k_wnu: k out of range");
    for (int x = 0; x < op.size; ++x)
        for (int y = 0; y < op.size; ++y) {
            if (x == y) continue;
            std::optional<Elem> value;
            std::vector<Elem> args(op.arity);
            // all position subsets of size k carry y
            std::vector<int> pos(k);
            for (int i = 0; i < k; ++i) pos[i] = i;
            while (true) {
                std::fill(args.begin(), args.end(), static_cast<Elem>(x));
                for (int p : pos) args[p] = static_cast<Elem>(y);
                Elem v = op.apply(args);
                if (!value) value = v;
                if (*value != v) return false;
                int i = k - 1;
                while (i >= 0 && pos[i] == op.arity - k + i) --i;
                if (i < 0) break;
                ++pos[i];
                for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
            }
        }
    return true;
}

struct IndexKey {
    int alg = 0;  // index into the algebra list
    Tuple alpha;  // a tuple with exactly two distinct values
};

// The relation generated by the n coordinate tuples over every two-valued
// argument tuple of every listed algebra.
struct GeneratedRelation {
    std::vector<FiniteAlgebra> algebras;
    int n = 0;
    std::vector<IndexKey> keys;
    std::vector<std::vector<Elem>> key_domain;  // Sg of the two values, per key
    std::vector<std::vector<int>> orbits;       // key indices grouped by Perm
    std::vector<int> orbit_of;                  // per key
    Closure closure;

    std::size_t width() const { return keys.size(); }

    // the key permutation induced by a permutation of [n]
    std::vector<int> key_action(const std::vector<int>& perm) const {
        std::map<std::pair<int, Tuple>, int> index;
        for (std::size_t k = 0; k < keys.size(); ++k)
            index[{keys[k].alg, keys[k].alpha}] = static_cast<int>(k);
        std::vector<int> act(keys.size());
        for (std::size_t k = 0; k < keys.size(); ++k) {
            Tuple moved(n);
            for (int j = 0; j < n; ++j) moved[j] = keys[k].alpha[perm[j]];
            act[k] = index.at({keys[k].alg, moved});
        }
        return act;
    }

    bool orbit_constant(const Tuple& t) const {
        for (const auto& orbit : orbits) {
            Elem v = t[orbit[0]];
            for (int k : orbit)
                if (t[k] != v) return false;
        }
        return true;
    }
};

namespace detail {

inline std::vector<std::vector<int>> permutations_of(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace detail

// Builds R for the listed algebras: index layout, per-key initial domains,
// Perm orbits, and the closure of the generators with term provenance.
// An optional stop predicate short-circuits the closure (used by the
// derivation search); the tuple count and application budget are capped.
inline GeneratedRelation build_generated_relation(
    std::vector<FiniteAlgebra> algebras, int n, const ClosureCaps& caps = {},
    bool stop_at_orbit_constant = false, bool allow_capped = false,
    const std::vector<std::vector<Elem>>* domain_filter = nullptr) {
    if (n < 3 || n % 2 == 0) throw InputError("build_generated_relation: n must be odd and >= 3");
    GeneratedRelation r;
    r.n = n;
    r.algebras = std::move(algebras);
    for (const FiniteAlgebra& a : r.algebras) {
        if (a.arity != n) throw InputError("build_generated_relation: algebra arity mismatch");
        if (!a.special) throw InputError("build_generated_relation: operation must be a special WNU");
    }
    // keys in lexicographic order per algebra
    for (std::size_t i = 0; i < r.algebras.size(); ++i) {
        const FiniteAlgebra& a = r.algebras[i];
        std::vector<Elem> args(n);
        for (std::size_t idx = 0; idx < ipow(a.size, static_cast<unsigned>(n)); ++idx) {
            detail::decode_args(idx, a.size, n, args);
            std::set<Elem> vals(args.begin(), args.end());
            if (vals.size() != 2) continue;
            IndexKey key;
            key.alg = static_cast<int>(i);
            key.alpha = args;
            r.keys.push_back(std::move(key));
        }
    }
    std::size_t expected = 0;
    for (const FiniteAlgebra& a : r.algebras)
        expected += static_cast<std::size_t>(a.size) * (a.size - 1);
    expected *= (ipow(2, static_cast<unsigned>(n - 1)) - 1);
    if (r.keys.size() != expected)
        throw DiagnosticError("build_generated_relation: key count mismatch");

    for (const IndexKey& key : r.keys) {
        std::set<Elem> vals(key.alpha.begin(), key.alpha.end());
        std::vector<Tuple> gens;
        for (Elem v : vals) gens.push_back({v});
        Closure cl = close_tuples(r.algebras[key.alg], 1, gens);
        std::vector<Elem> dom;
        for (const Tuple& t : cl.tuples) dom.push_back(t[0]);
        std::sort(dom.begin(), dom.end());
        r.key_domain.push_back(std::move(dom));
    }

    // orbits under the coordinate-permutation action
    r.orbit_of.assign(r.keys.size(), -1);
    auto perms = detail::permutations_of(n);
    std::vector<std::vector<int>> actions;
    for (const auto& p : perms) actions.push_back(r.key_action(p));
    for (std::size_t k = 0; k < r.keys.size(); ++k) {
        if (r.orbit_of[k] >= 0) continue;
        std::vector<int> orbit;
        int id = static_cast<int>(r.orbits.size());
        std::set<int> seen;
        for (const auto& act : actions) seen.insert(act[k]);
        for (int m : seen) {
            r.orbit_of[m] = id;
            orbit.push_back(m);
        }
        r.orbits.push_back(std::move(orbit));
    }

    // generators: gamma_j(key) = alpha(j)
    std::vector<Tuple> gens(n);
    for (int j = 0; j < n; ++j) {
        gens[j].resize(r.keys.size());
        for (std::size_t k = 0; k < r.keys.size(); ++k) gens[j][k] = r.keys[k].alpha[j];
    }
    bool symmetric = true;
    for (const FiniteAlgebra& a : r.algebras) symmetric = symmetric && a.symmetric;
    std::vector<const FiniteAlgebra*> coord_alg(r.keys.size());
    for (std::size_t k = 0; k < r.keys.size(); ++k) coord_alg[k] = &r.algebras[r.keys[k].alg];

    std::vector<std::vector<bool>> allowed;
    if (domain_filter) {
        allowed.assign(r.keys.size(), {});
        for (std::size_t k = 0; k < r.keys.size(); ++k) {
            allowed[k].assign(coord_alg[k]->size, false);
            for (Elem e : (*domain_filter)[k]) allowed[k][e] = true;
        }
    }

    std::function<bool(const Tuple&)> stop;
    if (stop_at_orbit_constant) stop = [&r](const Tuple& t) { return r.orbit_constant(t); };
    std::vector<Elem> buf(n);
    r.closure = detail::close_generic(
        r.keys.size(), n, gens, symmetric, /*provenance=*/true, caps, stop,
        [&](const std::vector<const Tuple*>& args, Tuple& out) {
            for (std::size_t k = 0; k < out.size(); ++k) {
                for (int i = 0; i < n; ++i) buf[i] = (*args[i])[k];
                out[k] = coord_alg[k]->apply(buf);
            }
            if (domain_filter) {
                // pruning: map filtered-out tuples back onto a generator so the
                // closure stays inside the allowed box (heuristic, the final
                // result is verified independently)
                for (std::size_t k = 0; k < out.size(); ++k)
                    if (!allowed[k][out[k]]) {
                        out = *args[0];
                        return;
                    }
            }
        });
    if (r.closure.capped && !allow_capped)
        throw CapError("build_generated_relation: closure cap exceeded (consider symmetric_reduce pruning)",
                       r.closure.count_reached);
    return r;
}

// All nontrivial subalgebras (size >= 2, proper) of alg, as standalone
// algebras; the main algebra first.
inline std::vector<FiniteAlgebra> with_nontrivial_subalgebras(const FiniteAlgebra& alg) {
    std::vector<FiniteAlgebra> list{alg};
    for (const auto& b : enumerate_subuniverses(alg)) {
        if (b.size() < 2 || static_cast<int>(b.size()) == alg.size) continue;
        list.push_back(restrict_algebra(alg, b).algebra);
    }
    return list;
}

// One step of the symmetric reduction: if some key's current domain has a
// proper BA or central subuniverse, restrict that key's whole orbit to it,
// intersect with R and re-project every key. Returns the smaller symmetric
// 1-consistent reduction, or nothing when no orbit can move.
inline std::optional<std::vector<std::vector<Elem>>> symmetric_reduce(
    const GeneratedRelation& r, const std::vector<std::vector<Elem>>& reduction,
    const ClosureCaps& caps = {}) {
    if (reduction.size() != r.width()) throw InputError("symmetric_reduce: reduction width mismatch");
    for (std::size_t k = 0; k < r.width(); ++k) {
        const std::vector<Elem>& dom = reduction[k];
        if (dom.size() <= 1) continue;
        RestrictedAlgebra ra = restrict_algebra(r.algebras[r.keys[k].alg], dom);
        std::vector<Elem> target;
        for (const auto& b : enumerate_subuniverses(ra.algebra)) {
            if (static_cast<int>(b.size()) == ra.algebra.size) continue;
            if (is_binary_absorbing(ra.algebra, b, caps).absorbing || is_central(ra.algebra, b, caps)) {
                for (Elem e : b) target.push_back(ra.embed[e]);
                break;
            }
        }
        if (target.empty()) continue;
        std::sort(target.begin(), target.end());
        // restrict the whole orbit and re-project
        std::vector<std::vector<Elem>> next = reduction;
        for (int m : r.orbits[r.orbit_of[k]]) next[m] = target;
        std::vector<std::set<Elem>> proj(r.width());
        for (const Tuple& t : r.closure.tuples) {
            bool in = true;
            for (std::size_t j = 0; j < r.width() && in; ++j)
                if (std::find(next[j].begin(), next[j].end(), t[j]) == next[j].end()) in = false;
            if (in)
                for (std::size_t j = 0; j < r.width(); ++j) proj[j].insert(t[j]);
        }
        for (std::size_t j = 0; j < r.width(); ++j) {
            if (proj[j].empty())
                throw DiagnosticError("symmetric_reduce: projection emptied (precondition breach)");
            next[j].assign(proj[j].begin(), proj[j].end());
        }
        return next;
    }
    return std::nullopt;
}

struct XYDerivation {
    FiniteAlgebra op;  // the n-ary XY-symmetric operation table
    Term term;         // a witness in the clone, over x1..xn
    std::size_t relation_size = 0;
};

namespace detail {

inline XYDerivation finish_derivation(const FiniteAlgebra& alg, int n, const GeneratedRelation& r,
                                      std::size_t witness) {
    XYDerivation d;
    d.term = extract_term(r.closure, witness);
    d.relation_size = r.closure.tuples.size();
    auto apply = [&](const std::vector<Elem>& a) { return alg.apply(a); };
    d.op = make_algebra(alg.size, n, [&](const std::vector<Elem>& args) {
        return eval_term(d.term, args, apply);
    });
    // the table must agree with the witness tuple on every main-algebra key
    const Tuple& gamma = r.closure.tuples[witness];
    for (std::size_t k = 0; k < r.width(); ++k) {
        if (r.keys[k].alg != 0) continue;
        if (d.op.apply(r.keys[k].alpha) != gamma[k])
            throw DiagnosticError("derive_xy: witness term does not re-evaluate to the tuple");
    }
    if (!check_xy_symmetric(d.op))
        throw DiagnosticError("derive_xy: orbit-constant witness is not XY-symmetric");
    return d;
}

}  // namespace detail

// Derives an n-ary XY-symmetric operation from the clone of a special WNU of
// arity n by breadth-first search for an orbit-constant tuple of the
// generated relation. For arity a multiple of n the result is obtained at the
// operation arity first and variables are then duplicated blockwise.
inline XYDerivation derive_xy(const FiniteAlgebra& alg, int n, const ClosureCaps& caps = {}) {
    if (n < 3 || n % 2 == 0) throw InputError("derive_xy: arity must be odd and >= 3");
    if (!alg.special) throw InputError("derive_xy: operation must be an idempotent special WNU");
    if (alg.arity != n) {
        if (alg.arity % n != 0)
            throw InputError("derive_xy: requested arity must divide the operation arity");
        XYDerivation base = derive_xy(alg, alg.arity, caps);
        int rep = alg.arity / n;
        XYDerivation d;
        Term t;
        std::vector<std::int32_t> leaves;
        std::vector<std::int32_t> kids;
        for (int j = 0; j < n; ++j) leaves.push_back(t.arena.add_var(j));
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < rep; ++c) kids.push_back(leaves[j]);
        // graft the base term on top of the duplicated variables
        std::vector<std::int32_t> map(base.term.arena.nodes.size());
        for (std::size_t i = 0; i < base.term.arena.nodes.size(); ++i) {
            const TermNode& nd = base.term.arena.nodes[i];
            if (nd.var >= 0) {
                map[i] = kids[nd.var];
            } else if (nd.is_leaf()) {
                map[i] = t.arena.add_const(nd.constant);
            } else {
                std::vector<std::int32_t> ks;
                for (std::int32_t kk : nd.kids) ks.push_back(map[kk]);
                map[i] = t.arena.add_op(std::move(ks));
            }
        }
        t.root = map[base.term.root];
        d.term = std::move(t);
        d.relation_size = base.relation_size;
        auto apply = [&](const std::vector<Elem>& a) { return alg.apply(a); };
        d.op = make_algebra(alg.size, n, [&](const std::vector<Elem>& args) {
            return eval_term(d.term, args, apply);
        });
        if (!check_xy_symmetric(d.op))
            throw DiagnosticError("derive_xy: blockwise substitution lost XY-symmetry");
        return d;
    }

    std::vector<FiniteAlgebra> algebras = with_nontrivial_subalgebras(alg);
    GeneratedRelation r;
    try {
        r = build_generated_relation(algebras, n, caps, /*stop_at_orbit_constant=*/true);
    } catch (const CapError&) {
        // retry with orbit-wise BA/central pruning of the initial domains;
        // the final witness is verified independently either way
        GeneratedRelation probe = build_generated_relation(algebras, n, caps, false,
                                                           /*allow_capped=*/true);
        std::vector<std::vector<Elem>> dom = probe.key_domain;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t k = 0; k < probe.width(); ++k) {
                if (dom[k].size() <= 1) continue;
                RestrictedAlgebra ra = restrict_algebra(probe.algebras[probe.keys[k].alg], dom[k]);
                for (const auto& b : enumerate_subuniverses(ra.algebra)) {
                    if (static_cast<int>(b.size()) == ra.algebra.size) continue;
                    if (is_binary_absorbing(ra.algebra, b, caps).absorbing ||
                        is_central(ra.algebra, b, caps)) {
                        std::vector<Elem> target;
                        for (Elem e : b) target.push_back(ra.embed[e]);
                        std::sort(target.begin(), target.end());
                        for (int m : probe.orbits[probe.orbit_of[k]]) dom[m] = target;
                        changed = true;
                        break;
                    }
                }
                if (changed) break;
            }
        }
        r = build_generated_relation(algebras, n, caps, /*stop_at_orbit_constant=*/true, false, &dom);
    }
    if (!r.closure.stopped_at.has_value()) {
        // the full closure always contains an orbit-constant tuple; with
        // pruning active a miss is a reportable hard failure instead
        throw DiagnosticError("derive_xy: no orbit-constant tuple found in the generated relation");
    }
    return detail::finish_derivation(alg, n, r, *r.closure.stopped_at);
}

}  // namespace zhukcsp

#endif
