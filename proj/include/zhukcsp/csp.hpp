#ifndef ZHUKCSP_CSP_HPP
#define ZHUKCSP_CSP_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zhukcsp/algebra.hpp"
#include "zhukcsp/congruence.hpp"
#include "zhukcsp/core.hpp"

namespace zhukcsp {

constexpr int kMaxRelationArity = 4;

struct Variable {
    std::string name;
    std::vector<Elem> domain;  // sorted
};

struct RelationDef {
    std::string name;
    int arity = 0;
    std::vector<Tuple> tuples;  // sorted, unique
};

struct Constraint {
    int rel = -1;            // index into Instance::relations (-1 for synthesized)
    std::vector<int> scope;  // distinct variable indices
    std::vector<Tuple> tuples;
};

// A CSP instance over one algebra. Domains and constraint relations are kept
// explicit; consistency passes produce new instances.
struct Instance {
    std::shared_ptr<const FiniteAlgebra> algebra;
    std::vector<Variable> vars;
    std::vector<RelationDef> relations;
    std::vector<Constraint> constraints;

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

// Exhaustive invariance check of one relation under the algebra operation;
// returns the offending tuple when not closed.
inline std::optional<Tuple> invariance_violation(const FiniteAlgebra& alg,
                                                 const std::vector<Tuple>& rel) {
    Tuple witness;
    if (tuples_closed_under_op(alg, rel, &witness)) return std::nullopt;
    return witness;
}

// Structural validation: relations invariant, domains closed, scopes sane.
inline void validate_instance(const Instance& inst) {
    const FiniteAlgebra& alg = *inst.algebra;
    for (const Variable& v : inst.vars) {
        if (v.domain.empty()) throw InputError("variable '" + v.name + "' has an empty domain");
        for (Elem e : v.domain)
            if (e >= alg.size) throw InputError("variable '" + v.name + "' domain value out of range");
        if (!is_closed_subset(alg, v.domain))
            throw InputError("variable '" + v.name + "' domain is not a subuniverse");
    }
    for (const RelationDef& r : inst.relations) {
        for (const Tuple& t : r.tuples) {
            if (static_cast<int>(t.size()) != r.arity)
                throw InputError("relation '" + r.name + "' tuple arity mismatch");
            for (Elem e : t)
                if (e >= alg.size) throw InputError("relation '" + r.name + "' value out of range");
        }
        if (auto bad = invariance_violation(alg, r.tuples)) {
            std::ostringstream os;
            os << "relation '" << r.name << "' is not invariant under the operation: rows produce (";
            for (std::size_t j = 0; j < bad->size(); ++j) os << (j ? "," : "") << int((*bad)[j]);
            os << ")";
            throw InputError(os.str());
        }
    }
    for (const Constraint& c : inst.constraints) {
        for (int v : c.scope)
            if (v < 0 || v >= static_cast<int>(inst.vars.size()))
                throw InputError("constraint scope references an undeclared variable");
        std::set<int> distinct(c.scope.begin(), c.scope.end());
        if (distinct.size() != c.scope.size())
            throw InputError("constraint scope has repeated variables after normalization");
        for (const Tuple& t : c.tuples)
            if (t.size() != c.scope.size()) throw InputError("constraint tuple arity mismatch");
    }
}

// --- instance file format ---------------------------------------------------
//
//   algebra <path-or-catalog-name>
//   var <name> [<elements>]
//   rel <name> <arity>
//   <one tuple per line>
//   end
//   con <relname> <var> <var> ...

using AlgebraResolver = std::function<FiniteAlgebra(const std::string&)>;

inline Instance parse_instance(const std::string& text, const AlgebraResolver& resolve) {
    Instance inst;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int current_rel = -1;
    auto err = [&](const std::string& msg) {
        return InputError("line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (current_rel >= 0 && word != "end") {
            // tuple line inside a rel block
            RelationDef& r = inst.relations[current_rel];
            Tuple t;
            std::istringstream ts(line);
            long v;
            while (ts >> v) {
                if (v < 0 || v >= 256) throw err("tuple value out of range");
                t.push_back(static_cast<Elem>(v));
            }
            if (!ts.eof()) throw err("expected integers in relation tuple");
            if (static_cast<int>(t.size()) != r.arity) throw err("tuple arity mismatch");
            r.tuples.push_back(std::move(t));
            continue;
        }
        if (word == "algebra") {
            std::string name;
            if (!(ls >> name)) throw err("expected algebra name or path");
            inst.algebra = std::make_shared<FiniteAlgebra>(resolve(name));
        } else if (word == "var") {
            std::string name;
            if (!(ls >> name)) throw err("expected variable name");
            if (inst.var_index(name) >= 0) throw err("duplicate variable '" + name + "'");
            Variable v;
            v.name = name;
            long e;
            while (ls >> e) v.domain.push_back(static_cast<Elem>(e));
            if (!inst.algebra) throw err("algebra must be declared before variables");
            if (v.domain.empty())
                for (int x = 0; x < inst.algebra->size; ++x) v.domain.push_back(static_cast<Elem>(x));
            std::sort(v.domain.begin(), v.domain.end());
            v.domain.erase(std::unique(v.domain.begin(), v.domain.end()), v.domain.end());
            inst.vars.push_back(std::move(v));
        } else if (word == "rel") {
            RelationDef r;
            if (!(ls >> r.name >> r.arity)) throw err("expected relation name and arity");
            if (r.arity < 1 || r.arity > kMaxRelationArity) throw err("relation arity out of range");
            inst.relations.push_back(std::move(r));
            current_rel = static_cast<int>(inst.relations.size()) - 1;
        } else if (word == "end") {
            if (current_rel < 0) throw err("'end' outside a relation block");
            auto& ts = inst.relations[current_rel].tuples;
            std::sort(ts.begin(), ts.end());
            ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
            current_rel = -1;
        } else if (word == "con") {
            std::string rname;
            if (!(ls >> rname)) throw err("expected relation name");
            int rel = -1;
            for (std::size_t i = 0; i < inst.relations.size(); ++i)
                if (inst.relations[i].name == rname) rel = static_cast<int>(i);
            if (rel < 0) throw err("undeclared relation '" + rname + "'");
            std::vector<int> scope;
            std::string vn;
            while (ls >> vn) {
                int vi = inst.var_index(vn);
                if (vi < 0) throw err("undeclared variable '" + vn + "'");
                scope.push_back(vi);
            }
            if (static_cast<int>(scope.size()) != inst.relations[rel].arity)
                throw err("constraint arity mismatch for relation '" + rname + "'");
            Constraint c;
            c.rel = rel;
            // repeated scope variables: restrict to the matching diagonal and
            // dedup the scope (the restriction is pp-definable, so invariant)
            std::vector<int> dedup;
            std::vector<int> colmap(scope.size());
            for (std::size_t i = 0; i < scope.size(); ++i) {
                int at = -1;
                for (std::size_t j = 0; j < dedup.size(); ++j)
                    if (dedup[j] == scope[i]) at = static_cast<int>(j);
                if (at < 0) {
                    dedup.push_back(scope[i]);
                    at = static_cast<int>(dedup.size()) - 1;
                }
                colmap[i] = at;
            }
            for (const Tuple& t : inst.relations[rel].tuples) {
                Tuple proj(dedup.size(), 0);
                bool ok = true;
                std::vector<bool> seen(dedup.size(), false);
                for (std::size_t i = 0; i < t.size(); ++i) {
                    if (seen[colmap[i]] && proj[colmap[i]] != t[i]) {
                        ok = false;
                        break;
                    }
                    proj[colmap[i]] = t[i];
                    seen[colmap[i]] = true;
                }
                if (ok) c.tuples.push_back(std::move(proj));
            }
            std::sort(c.tuples.begin(), c.tuples.end());
            c.tuples.erase(std::unique(c.tuples.begin(), c.tuples.end()), c.tuples.end());
            c.scope = std::move(dedup);
            inst.constraints.push_back(std::move(c));
        } else {
            throw err("unknown directive '" + word + "'");
        }
    }
    if (current_rel >= 0) throw InputError("unterminated relation block");
    if (!inst.algebra) throw InputError("instance declares no algebra");
    validate_instance(inst);
    return inst;
}

inline std::string instance_to_text(const Instance& inst, const std::string& algebra_name) {
    std::ostringstream os;
    os << "algebra " << algebra_name << "\n";
    for (const Variable& v : inst.vars) {
        os << "var " << v.name;
        if (static_cast<int>(v.domain.size()) != inst.algebra->size)
            for (Elem e : v.domain) os << ' ' << int(e);
        os << "\n";
    }
    for (const RelationDef& r : inst.relations) {
        os << "rel " << r.name << ' ' << r.arity << "\n";
        for (const Tuple& t : r.tuples) {
            for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << int(t[i]);
            os << "\n";
        }
        os << "end\n";
    }
    for (const Constraint& c : inst.constraints) {
        os << "con " << inst.relations[c.rel].name;
        for (int v : c.scope) os << ' ' << inst.vars[v].name;
        os << "\n";
    }
    return os.str();
}

// --- consistency -------------------------------------------------------------

struct ConsistencyResult {
    bool unsat = false;
    Instance inst;
};

// 1-consistency plus cycle-consistency by pairwise path closure: per ordered
// variable pair keep the meet of constraint projections, intersect with
// compositions through every third variable, and re-project constraints, to
// fixpoint. Never removes a value that occurs in a solution.
inline ConsistencyResult enforce_consistency(const Instance& input) {
    ConsistencyResult res;
    res.inst = input;
    Instance& inst = res.inst;
    int nv = static_cast<int>(inst.vars.size());
    int k = inst.algebra->size;

    std::vector<std::uint32_t> dom(nv, 0);
    for (int x = 0; x < nv; ++x)
        for (Elem e : inst.vars[x].domain) dom[x] |= 1u << e;
    std::vector<RelMask> rho(static_cast<std::size_t>(nv) * nv);
    auto rho_at = [&](int x, int y) -> RelMask& { return rho[static_cast<std::size_t>(x) * nv + y]; };
    for (int x = 0; x < nv; ++x)
        for (int y = 0; y < nv; ++y) {
            RelMask full = 0;
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    if (((dom[x] >> a) & 1) && ((dom[y] >> b) & 1)) full |= rel_bit(a, b);
            rho_at(x, y) = full;
        }

    auto filter_constraints = [&]() -> bool {  // false when something empties
        for (Constraint& c : inst.constraints) {
            std::vector<Tuple> kept;
            for (const Tuple& t : c.tuples) {
                bool ok = true;
                for (std::size_t i = 0; i < c.scope.size() && ok; ++i) {
                    if (!((dom[c.scope[i]] >> t[i]) & 1)) ok = false;
                    for (std::size_t j = 0; j < c.scope.size() && ok; ++j)
                        if (i != j && !rel_has(rho_at(c.scope[i], c.scope[j]), t[i], t[j]))
                            ok = false;
                }
                if (ok) kept.push_back(t);
            }
            c.tuples = std::move(kept);
            if (c.tuples.empty()) return false;
            // re-project onto domains and pair relations
            std::vector<std::uint32_t> proj(c.scope.size(), 0);
            for (const Tuple& t : c.tuples)
                for (std::size_t i = 0; i < c.scope.size(); ++i) proj[i] |= 1u << t[i];
            for (std::size_t i = 0; i < c.scope.size(); ++i) dom[c.scope[i]] &= proj[i];
            for (std::size_t i = 0; i < c.scope.size(); ++i)
                for (std::size_t j = 0; j < c.scope.size(); ++j) {
                    if (i == j) continue;
                    RelMask pr = 0;
                    for (const Tuple& t : c.tuples) pr |= rel_bit(t[i], t[j]);
                    rho_at(c.scope[i], c.scope[j]) &= pr;
                }
        }
        for (int x = 0; x < nv; ++x)
            if (dom[x] == 0) return false;
        return true;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        auto before_dom = dom;
        auto before_rho = rho;
        if (!filter_constraints()) {
            res.unsat = true;
            return res;
        }
        // clip pair relations to domains and close paths through every z
        for (int x = 0; x < nv; ++x)
            for (int y = 0; y < nv; ++y) {
                if (x == y) continue;
                RelMask clip = 0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b)
                        if (((dom[x] >> a) & 1) && ((dom[y] >> b) & 1)) clip |= rel_bit(a, b);
                rho_at(x, y) &= clip;
                for (int z = 0; z < nv; ++z) {
                    if (z == x || z == y) continue;
                    rho_at(x, y) &= rel_compose(rho_at(x, z), rho_at(z, y), k);
                }
                if (rho_at(x, y) == 0) {
                    res.unsat = true;
                    return res;
                }
                // 1-consistency of the pair relation itself
                std::uint32_t px = 0, py = 0;
                for (int a = 0; a < k; ++a)
                    for (int b = 0; b < k; ++b)
                        if (rel_has(rho_at(x, y), a, b)) {
                            px |= 1u << a;
                            py |= 1u << b;
                        }
                dom[x] &= px;
                dom[y] &= py;
            }
        for (int x = 0; x < nv; ++x)
            if (dom[x] == 0) {
                res.unsat = true;
                return res;
            }
        if (dom != before_dom || rho != before_rho) changed = true;
    }

    for (int x = 0; x < nv; ++x) {
        inst.vars[x].domain.clear();
        for (int e = 0; e < k; ++e)
            if ((dom[x] >> e) & 1) inst.vars[x].domain.push_back(static_cast<Elem>(e));
    }
    return res;
}

// --- linkedness / fragmentation ----------------------------------------------

struct LinkReport {
    // pair components: per variable, per value, a component id
    std::vector<std::map<Elem, int>> component_of;
    int components = 0;
    // variable-level connectivity through shared constraints
    std::vector<int> var_component;
    int var_components = 0;
    bool linked = false;
    bool fragmented = false;
};

inline LinkReport linked_components(const Instance& inst) {
    int nv = static_cast<int>(inst.vars.size());
    LinkReport rep;
    rep.component_of.resize(nv);
    std::vector<std::pair<int, Elem>> nodes;
    std::map<std::pair<int, Elem>, int> id;
    for (int x = 0; x < nv; ++x)
        for (Elem a : inst.vars[x].domain) {
            id[{x, a}] = static_cast<int>(nodes.size());
            nodes.emplace_back(x, a);
        }
    detail::UnionFind uf(static_cast<int>(nodes.size()));
    detail::UnionFind vuf(nv);
    for (const Constraint& c : inst.constraints) {
        for (std::size_t i = 0; i < c.scope.size(); ++i)
            for (std::size_t j = 0; j < c.scope.size(); ++j) {
                if (i == j) continue;
                vuf.unite(c.scope[i], c.scope[j]);
                for (const Tuple& t : c.tuples) {
                    auto it1 = id.find({c.scope[i], t[i]});
                    auto it2 = id.find({c.scope[j], t[j]});
                    if (it1 != id.end() && it2 != id.end()) uf.unite(it1->second, it2->second);
                }
            }
    }
    std::map<int, int> remap;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        int r = uf.find(static_cast<int>(n));
        auto it = remap.emplace(r, static_cast<int>(remap.size())).first;
        rep.component_of[nodes[n].first][nodes[n].second] = it->second;
    }
    rep.components = static_cast<int>(remap.size());
    std::map<int, int> vremap;
    rep.var_component.resize(nv);
    for (int x = 0; x < nv; ++x) {
        int r = vuf.find(x);
        auto it = vremap.emplace(r, static_cast<int>(vremap.size())).first;
        rep.var_component[x] = it->second;
    }
    rep.var_components = static_cast<int>(vremap.size());
    rep.fragmented = rep.var_components > 1 && nv > 1;
    // linked per the definition: all values of each variable co-component
    rep.linked = true;
    for (int x = 0; x < nv && rep.linked; ++x) {
        const auto& m = rep.component_of[x];
        for (auto it = m.begin(); it != m.end(); ++it)
            if (it->second != m.begin()->second) rep.linked = false;
    }
    return rep;
}

// --- Con(R, i) ----------------------------------------------------------------

struct ConOneResult {
    RelMask relation = 0;
    bool rectangular = false;
};

// Pairs of values the i-th coordinate can take on rows agreeing elsewhere;
// a congruence-like relation exactly when the coordinate is rectangular.
inline ConOneResult con_one(const std::vector<Tuple>& rel, int i) {
    ConOneResult res;
    std::map<Tuple, std::vector<Elem>> groups;
    for (const Tuple& t : rel) {
        Tuple rest;
        for (std::size_t j = 0; j < t.size(); ++j)
            if (static_cast<int>(j) != i) rest.push_back(t[j]);
        groups[rest].push_back(t[i]);
    }
    for (auto& [rest, vals] : groups)
        for (Elem a : vals)
            for (Elem b : vals) res.relation |= rel_bit(a, b);
    // rectangular: substituting related values stays in the relation
    res.rectangular = true;
    std::set<Tuple> in(rel.begin(), rel.end());
    for (const Tuple& t : rel) {
        for (int b = 0; b < 8 && res.rectangular; ++b) {
            if (!rel_has(res.relation, t[i], b)) continue;
            Tuple t2 = t;
            t2[i] = static_cast<Elem>(b);
            if (!in.count(t2)) res.rectangular = false;
        }
    }
    return res;
}

}  // namespace zhukcsp

#endif
