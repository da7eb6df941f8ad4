#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "zhukcsp/classify.hpp"
#include "zhukcsp/harness.hpp"
#include "zhukcsp/oracle.hpp"
#include "zhukcsp/solver.hpp"
#include "zhukcsp/subuniverse.hpp"
#include "zhukcsp/xy.hpp"

using namespace zhukcsp;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// catalog names first, then file paths
FiniteAlgebra resolve_algebra(const std::string& name) {
    for (const std::string& n : catalog_names())
        if (n == name) return catalog(name);
    FiniteAlgebra a = load_algebra(read_file(name));
    if (!a.special)
        std::cerr << "warning: '" << name << "' is a WNU but not special; the solver will reject it\n";
    return a;
}

std::string set_to_string(const std::vector<Elem>& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(int(s[i]));
    return out + "}";
}

std::string rel_to_string(RelMask r, int n) {
    std::string out = "{";
    bool first = true;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (rel_has(r, a, b)) {
                if (!first) out += " ";
                out += "(" + std::to_string(a) + "," + std::to_string(b) + ")";
                first = false;
            }
    return out + "}";
}

int run_solve(const std::string& path, bool assign, bool trace, const SolveOptions& base) {
    Instance inst = parse_instance(read_file(path), resolve_algebra);
    SolveOptions opts = base;
    if (trace)
        opts.trace = [&inst](const TraceEvent& ev) {
            const char* kind = ev.kind == TraceEvent::Kind::Reduce        ? "reduce"
                               : ev.kind == TraceEvent::Kind::LinearEnter ? "linear"
                               : ev.kind == TraceEvent::Kind::Drop        ? "drop"
                               : ev.kind == TraceEvent::Kind::Subspace    ? "subspace"
                               : ev.kind == TraceEvent::Kind::Dim         ? "dim"
                                                                          : "verdict";
            std::string var = "-";
            if (ev.var >= 0 && ev.var < static_cast<int>(inst.vars.size()))
                var = inst.vars[ev.var].name;
            std::string detail = ev.detail;
            if (ev.kind == TraceEvent::Kind::Reduce) detail += " to " + set_to_string(ev.subset);
            std::cout << "step " << kind << " " << var << " " << detail << "\n";
        };
    if (assign) {
        auto sol = extract_solution(inst, opts);
        if (!sol) {
            std::cout << "unsatisfiable\n";
            return 0;
        }
        std::cout << "satisfiable\n";
        for (std::size_t x = 0; x < inst.vars.size(); ++x)
            std::cout << inst.vars[x].name << "=" << int((*sol)[x]) << "\n";
        return 0;
    }
    Verdict v = solve_decision(inst, opts);
    std::cout << (v == Verdict::Sat ? "satisfiable" : "unsatisfiable") << "\n";
    return 0;
}

int run_oracle(const std::string& path, bool count, std::uint64_t cap_product) {
    Instance inst = parse_instance(read_file(path), resolve_algebra);
    if (count) {
        std::cout << brute_force(inst, OracleMode::Count, cap_product).count << "\n";
    } else {
        OracleResult r = brute_force(inst, OracleMode::First, cap_product);
        std::cout << (r.sat ? "satisfiable" : "unsatisfiable") << "\n";
    }
    return 0;
}

int run_analyze(const std::string& name, bool force, const ClosureCaps& caps) {
    FiniteAlgebra alg;
    bool is_catalog = false;
    for (const std::string& n : catalog_names())
        if (n == name) is_catalog = true;
    alg = is_catalog ? catalog(name) : load_algebra(read_file(name), force);
    std::cout << "size " << alg.size << " arity " << alg.arity << " idempotent "
              << (alg.idempotent ? "yes" : "no") << " wnu " << (alg.wnu ? "yes" : "no")
              << " special " << (alg.special ? "yes" : "no") << "\n";
    if (!alg.special) {
        std::cout << "(subuniverse/congruence analysis requires an idempotent special WNU)\n";
        return 0;
    }
    std::cout << "abelian " << (is_abelian(alg) ? "yes" : "no") << "\n";
    for (const auto& b : enumerate_subuniverses(alg)) {
        std::cout << "subuniverse " << set_to_string(b);
        if (static_cast<int>(b.size()) < alg.size) {
            bool ba = is_binary_absorbing(alg, b, caps).absorbing;
            bool tern = is_ternary_absorbing(alg, b, caps).absorbing;
            bool c = is_central(alg, b, caps);
            if (ba) std::cout << " BA";
            if (tern) std::cout << " TERN-ABS";
            if (c) std::cout << " C";
            if (ba && c) std::cout << " S";
        } else {
            std::cout << " (full)";
        }
        std::cout << "\n";
    }
    for (const Congruence& c : all_congruences(alg)) {
        std::cout << "congruence blocks=[";
        auto blocks = c.block_list();
        for (std::size_t i = 0; i < blocks.size(); ++i)
            std::cout << (i ? " " : "") << set_to_string(blocks[i]);
        std::cout << "]";
        if (c.is_full()) {
            std::cout << " (full)\n";
            continue;
        }
        CoverReport cov = irreducible_with_cover(alg, c);
        if (!cov.irreducible) {
            std::cout << " irreducible=no\n";
            continue;
        }
        IrreducibleReport rep = classify_irreducible(alg, c, cov.cover, caps);
        std::cout << " irreducible=yes cover=" << rel_to_string(cov.cover, alg.size);
        if (rep.cls == IrrClass::Linear) {
            std::cout << " Linear(p=" << rep.prime << ") bridge-quads=" << rep.bridge.quads.size();
        } else {
            std::cout << " PC";
        }
        std::cout << "\n";
    }
    StrongFinding f = find_strong_subuniverse(alg, caps);
    std::cout << "strong ";
    switch (f.kind) {
        case StrongKind::BA: std::cout << "BA " << set_to_string(f.subset); break;
        case StrongKind::Central: std::cout << "central " << set_to_string(f.subset); break;
        case StrongKind::PCBlock: std::cout << "pc-block " << set_to_string(f.subset); break;
        case StrongKind::LinearOnly: std::cout << "linear-only (" << f.linears.size() << ")"; break;
        case StrongKind::None: std::cout << "none (singleton domain)"; break;
    }
    std::cout << "\n";
    return 0;
}

int run_xy(const std::string& name, int arity, const std::string& term_out,
           const ClosureCaps& caps) {
    FiniteAlgebra alg = resolve_algebra(name);
    XYDerivation d = derive_xy(alg, arity, caps);
    for (std::size_t i = 0; i < d.op.table.size(); ++i)
        std::cout << (i ? " " : "") << int(d.op.table[i]);
    std::cout << "\n";
    if (!term_out.empty()) {
        std::ofstream out(term_out);
        if (!out) throw InputError("cannot write '" + term_out + "'");
        out << term_to_string(d.term) << "\n";
    }
    return 0;
}

int run_gen(const GenParams& p, const std::string& out_path, const ClosureCaps& caps) {
    Instance inst = gen_instance(p, resolve_algebra(p.algebra_name), caps);
    std::string text = instance_to_text(inst, p.algebra_name);
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) throw InputError("cannot write '" + out_path + "'");
        out << text;
    }
    return 0;
}

int run_fuzz(const GenParams& p, int cases, const SolveOptions& opts) {
    FuzzReport rep = fuzz_compare(p, cases, resolve_algebra(p.algebra_name), opts);
    std::cout << "cases " << rep.cases << " sat " << rep.sat << " unsat " << rep.unsat
              << " reductions-checked " << rep.reductions_checked << " mismatches "
              << rep.mismatches.size() << "\n";
    for (const FuzzMismatch& m : rep.mismatches) {
        std::cout << "MISMATCH case " << m.case_index << " seed " << m.seed << " kind " << m.kind
                  << ": " << m.detail << "\n"
                  << m.instance_text;
    }
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-domain CSP solver over a single special WNU polymorphism"};
    app.require_subcommand(1);

    std::size_t cap_tuples = 1'000'000;
    std::uint64_t cap_product = 100'000'000ull;
    app.add_option("--cap-tuples", cap_tuples, "closure tuple cap");
    app.add_option("--cap-product", cap_product, "oracle assignment-space cap");

    std::string instance_path, algebra_name, term_out, out_path;
    bool assign = false, trace = false, count = false, force = false, planted = false;
    int arity = 3, cases = 100;
    GenParams gp;

    CLI::App* solve = app.add_subcommand("solve", "decide an instance");
    solve->add_option("--instance", instance_path, "instance file (.csp)")->required();
    solve->add_flag("--assign", assign, "print a satisfying assignment");
    solve->add_flag("--trace", trace, "stream reduction and linear-phase steps");

    CLI::App* oracle = app.add_subcommand("oracle", "brute-force an instance");
    oracle->add_option("--instance", instance_path, "instance file (.csp)")->required();
    oracle->add_flag("--count", count, "count solutions");

    CLI::App* analyze = app.add_subcommand("analyze", "subuniverse and congruence report");
    analyze->add_option("--algebra", algebra_name, "catalog name or .alg file")->required();
    analyze->add_flag("--force", force, "accept non-WNU tables for inspection");

    CLI::App* xy = app.add_subcommand("xy", "derive an XY-symmetric operation");
    xy->add_option("--algebra", algebra_name, "catalog name or .alg file")->required();
    xy->add_option("--arity", arity, "target arity (odd)")->required();
    xy->add_option("--term-out", term_out, "write the witness term here");

    CLI::App* gen = app.add_subcommand("gen", "generate a seeded instance");
    gen->add_option("--algebra", gp.algebra_name, "catalog name or .alg file");
    gen->add_option("--vars", gp.vars, "variable count");
    gen->add_option("--constraints", gp.constraints, "constraint count");
    gen->add_option("--max-arity", gp.max_arity, "max constraint arity");
    gen->add_option("--max-generators", gp.max_generators, "max relation generators");
    gen->add_option("--seed", gp.seed, "64-bit seed");
    gen->add_flag("--planted", planted, "plant a solution");
    gen->add_option("-o,--out", out_path, "output path (default stdout)");

    CLI::App* fuzz = app.add_subcommand("fuzz", "differential fuzzing against the oracle");
    fuzz->add_option("--algebra", gp.algebra_name, "catalog name or .alg file");
    fuzz->add_option("--vars", gp.vars, "variable count");
    fuzz->add_option("--constraints", gp.constraints, "constraint count");
    fuzz->add_option("--max-arity", gp.max_arity, "max constraint arity");
    fuzz->add_option("--max-generators", gp.max_generators, "max relation generators");
    fuzz->add_option("--seed", gp.seed, "base seed");
    fuzz->add_option("--cases", cases, "number of cases");

    CLI11_PARSE(app, argc, argv);

    ClosureCaps caps;
    caps.max_tuples = cap_tuples;
    SolveOptions opts;
    opts.caps = caps;

    try {
        gp.planted = planted;
        if (solve->parsed()) return run_solve(instance_path, assign, trace, opts);
        if (oracle->parsed()) return run_oracle(instance_path, count, cap_product);
        if (analyze->parsed()) return run_analyze(algebra_name, force, caps);
        if (xy->parsed()) return run_xy(algebra_name, arity, term_out, caps);
        if (gen->parsed()) return run_gen(gp, out_path, caps);
        if (fuzz->parsed()) return run_fuzz(gp, cases, opts);
    } catch (const CapError& e) {
        std::cerr << "error (cap): " << e.what() << "\n";
        return 3;
    } catch (const DiagnosticError& e) {
        std::cerr << "error (internal diagnostic): " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
