#ifndef ZHUKCSP_HARNESS_HPP
#define ZHUKCSP_HARNESS_HPP

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "zhukcsp/oracle.hpp"
#include "zhukcsp/solver.hpp"
#include "zhukcsp/subpower.hpp"

namespace zhukcsp {

// splitmix64: the standard 64-bit mixing generator. Per-component substreams
// are derived by seeding with seed XOR mix(GOLDEN * (component + 1)), so any
// implementation in any language can reproduce corpora bit-exactly.
// Constants: GOLDEN = 0x9E3779B97F4A7C15, mix multipliers
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, shifts 30/27/31.
struct SplitMix64 {
    std::uint64_t state = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        return mix(state);
    }

    // uniform integer in [0, n) via modulo (documented, keeps cross-language
    // reproduction trivial at these tiny ranges)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t component) {
    return SplitMix64{seed ^ SplitMix64::mix(0x9E3779B97F4A7C15ull * (component + 1))};
}

struct GenParams {
    std::string algebra_name = "Z2";
    int vars = 4;
    int constraints = 3;
    int max_arity = 3;
    int max_generators = 3;
    std::uint64_t seed = 0;
    bool planted = false;
};

// Seeded instance generation: every relation is the subalgebra generated by
// random tuples, hence invariant by construction; scopes are drawn without
// repetition. With a planted solution, a random assignment seeds every
// relation so the instance is satisfiable by construction.
inline Instance gen_instance(const GenParams& p, const FiniteAlgebra& algebra,
                             const ClosureCaps& caps = {}) {
    if (p.vars < 1 || p.constraints < 0 || p.max_arity < 1 || p.max_generators < 1)
        throw InputError("gen_instance: parameters must be positive");
    if (p.max_arity > kMaxRelationArity) throw InputError("gen_instance: arity above the cap");
    Instance inst;
    inst.algebra = std::make_shared<FiniteAlgebra>(algebra);
    for (int i = 0; i < p.vars; ++i) {
        Variable v;
        v.name = "x" + std::to_string(i);
        for (int e = 0; e < algebra.size; ++e) v.domain.push_back(static_cast<Elem>(e));
        inst.vars.push_back(std::move(v));
    }
    std::vector<Elem> planted(p.vars, 0);
    if (p.planted) {
        SplitMix64 rng = substream(p.seed, 0);
        for (int i = 0; i < p.vars; ++i)
            planted[i] = static_cast<Elem>(rng.below(algebra.size));
    }
    for (int ci = 0; ci < p.constraints; ++ci) {
        SplitMix64 rng = substream(p.seed, 1 + ci);
        int arity = 1 + static_cast<int>(rng.below(std::min(p.max_arity, p.vars)));
        // scope: distinct variables, drawn uniformly
        std::vector<int> pool(p.vars);
        for (int i = 0; i < p.vars; ++i) pool[i] = i;
        std::vector<int> scope;
        for (int j = 0; j < arity; ++j) {
            int at = static_cast<int>(rng.below(pool.size()));
            scope.push_back(pool[at]);
            pool.erase(pool.begin() + at);
        }
        int ngens = 1 + static_cast<int>(rng.below(p.max_generators));
        std::vector<Tuple> gens;
        for (int g = 0; g < ngens; ++g) {
            Tuple t(arity);
            for (int j = 0; j < arity; ++j) t[j] = static_cast<Elem>(rng.below(algebra.size));
            gens.push_back(std::move(t));
        }
        if (p.planted) {
            Tuple t(arity);
            for (int j = 0; j < arity; ++j) t[j] = planted[scope[j]];
            gens.push_back(std::move(t));
        }
        Subpower sp = sg_generate(algebra, arity, gens, false, caps);
        RelationDef rel;
        rel.name = "r" + std::to_string(ci);
        rel.arity = arity;
        rel.tuples = sp.sorted_tuples();
        inst.relations.push_back(rel);
        Constraint c;
        c.rel = ci;
        c.scope = scope;
        c.tuples = inst.relations.back().tuples;
        inst.constraints.push_back(std::move(c));
    }
    validate_instance(inst);
    return inst;
}

struct FuzzMismatch {
    std::uint64_t seed = 0;
    int case_index = 0;
    std::string kind;  // "verdict", "reduction-safety", "consistency-soundness"
    std::string instance_text;
    std::string detail;
};

struct FuzzReport {
    int cases = 0;
    int sat = 0;
    int unsat = 0;
    int reductions_checked = 0;
    std::vector<FuzzMismatch> mismatches;

    bool ok() const { return mismatches.empty(); }
};

// Differential run: generated instances are solved by both the decision
// algorithm and the brute-force oracle; verdicts must match. Additionally
// every strong reduction taken on an oracle-satisfiable instance must keep a
// solution, and consistency must never delete a solution value.
inline FuzzReport fuzz_compare(const GenParams& base, int cases, const FiniteAlgebra& algebra,
                               const SolveOptions& opts_in = {}) {
    FuzzReport rep;
    SolveOptions opts = opts_in;
    if (!opts.cache) opts.cache = std::make_shared<detail::SharedAnalysis>();
    for (int case_index = 0; case_index < cases; ++case_index) {
        GenParams p = base;
        p.seed = base.seed + static_cast<std::uint64_t>(case_index) * 0x10001ull;
        p.planted = base.planted || (case_index % 2 == 1);
        Instance inst = gen_instance(p, algebra, opts.caps);
        auto record = [&](const std::string& kind, const std::string& detail) {
            FuzzMismatch m;
            m.seed = p.seed;
            m.case_index = case_index;
            m.kind = kind;
            m.instance_text = instance_to_text(inst, p.algebra_name);
            m.detail = detail;
            rep.mismatches.push_back(std::move(m));
        };

        std::vector<TraceEvent> reductions;
        SolveOptions traced = opts;
        traced.trace = [&](const TraceEvent& ev) {
            if (ev.kind == TraceEvent::Kind::Reduce) reductions.push_back(ev);
        };
        Verdict got;
        try {
            got = solve_decision(inst, traced);
        } catch (const Error& e) {
            record("verdict", std::string("solver raised: ") + e.what());
            ++rep.cases;
            continue;
        }
        OracleResult want = brute_force(inst);
        if ((got == Verdict::Sat) != want.sat)
            record("verdict", want.sat ? "oracle sat, solver unsat" : "oracle unsat, solver sat");
        (got == Verdict::Sat ? rep.sat : rep.unsat) += 1;

        // reduction safety on every strong reduction taken anywhere in the run
        for (const TraceEvent& ev : reductions) {
            if (!ev.pre) continue;
            if (!brute_force(*ev.pre).sat) continue;
            Instance reduced = *ev.pre;
            reduced.vars[ev.var].domain = ev.subset;
            ++rep.reductions_checked;
            if (!brute_force(reduced).sat)
                record("reduction-safety",
                       "reduction of " + reduced.vars[ev.var].name + " (" + ev.detail +
                           ") removed all solutions");
        }

        // consistency soundness and idempotence
        ConsistencyResult cr = enforce_consistency(inst);
        if (!cr.unsat) {
            OracleResult all = brute_force(inst, OracleMode::All);
            for (const auto& sol : all.solutions)
                for (std::size_t x = 0; x < inst.vars.size(); ++x) {
                    const auto& dom = cr.inst.vars[x].domain;
                    if (std::find(dom.begin(), dom.end(), sol[x]) == dom.end())
                        record("consistency-soundness",
                               "value " + std::to_string(int(sol[x])) + " of " +
                                   inst.vars[x].name + " deleted");
                }
            ConsistencyResult twice = enforce_consistency(cr.inst);
            if (twice.unsat)
                record("consistency-soundness", "idempotence: second pass emptied");
            else
                for (std::size_t x = 0; x < inst.vars.size(); ++x)
                    if (twice.inst.vars[x].domain != cr.inst.vars[x].domain)
                        record("consistency-soundness", "idempotence: domains changed");
        } else if (brute_force(inst).sat) {
            record("consistency-soundness", "consistency refuted a satisfiable instance");
        }
        ++rep.cases;
    }
    return rep;
}

}  // namespace zhukcsp

#endif
