#ifndef ZHUKCSP_SOLVER_HPP
#define ZHUKCSP_SOLVER_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zhukcsp/classify.hpp"
#include "zhukcsp/csp.hpp"
#include "zhukcsp/subuniverse.hpp"

namespace zhukcsp {

enum class Verdict { Sat, Unsat };

// --- tracing ----------------------------------------------------------------

struct TraceEvent {
    enum class Kind { Reduce, LinearEnter, Drop, Subspace, Dim, Verdict } kind;
    int depth = 0;
    std::string detail;
    // Reduce events carry the consistency-enforced instance and the reduction
    // so safety can be replayed against an oracle.
    std::shared_ptr<const Instance> pre;
    int var = -1;
    std::vector<Elem> subset;
};

using TraceSink = std::function<void(const TraceEvent&)>;

// --- affine machinery ---------------------------------------------------------

inline int mod_inverse(int a, int p) {
    a %= p;
    if (a < 0) a += p;
    for (int x = 1; x < p; ++x)
        if ((a * x) % p == 1) return x;
    throw DiagnosticError("mod_inverse: not invertible");
}

// c + sum(coef * src_coord) over Z_prime.
struct AffineForm {
    int prime = 2;
    Elem c = 0;
    std::vector<std::pair<int, Elem>> terms;

    Elem eval(const std::vector<Elem>& alpha) const {
        int v = c;
        for (auto [i, coef] : terms) v += coef * alpha[i];
        return static_cast<Elem>(v % prime);
    }
};

// phi: Z_{q_1} x ... x Z_{q_m} -> product of per-variable linear quotients,
// one affine form per target coordinate. Forms only reference source
// coordinates over the same prime.
struct AffineMap {
    std::vector<int> src_primes;
    std::vector<AffineForm> target;

    int dimension() const { return static_cast<int>(src_primes.size()); }
    std::uint64_t box_size() const {
        std::uint64_t n = 1;
        for (int q : src_primes) n *= static_cast<unsigned>(q);
        return n;
    }
};

// The computed membership set phi^-1(I'). p3 always yields a codimension-1
// equation; p2 prefers one when it fits and otherwise falls back to an
// explicit affine point set of any dimension (verified, never guessed).
struct SubspaceDescr {
    enum class Tag { Empty, Full, Equation, Points } tag = Tag::Empty;
    int prime = 0;
    std::vector<std::pair<int, Elem>> coeffs;  // Equation: over source coords, all nonzero
    Elem constant = 0;
    std::vector<std::vector<Elem>> points;  // Points: sorted, affine

    bool member(const std::vector<Elem>& alpha) const {
        int v = 0;
        for (auto [i, c] : coeffs) v += c * alpha[i];
        return v % prime == constant;
    }
};

// --- per-solve caches ---------------------------------------------------------

namespace detail {

struct VarLinear {
    RestrictedAlgebra ra;
    Congruence sigma;                        // minimal full-cover linear meet, on restricted labels
    std::vector<std::vector<Elem>> blocks;   // quotient element -> original-label elements
    GroupInfo group;                         // on the quotient
    std::map<std::vector<Elem>, Elem> elem_of_coords;
};

struct DomainAnalysis {
    RestrictedAlgebra ra;
    StrongFinding strong;
};

// Per-algebra analysis results keyed by the domain-subset mask; shareable
// across many solves of instances over the same algebra.
struct SharedAnalysis {
    std::map<std::uint32_t, DomainAnalysis> strong_cache;
    std::map<std::uint32_t, VarLinear> linear_cache;
};

}  // namespace detail

struct SolveOptions {
    ClosureCaps caps;
    TraceSink trace;
    std::uint64_t pointwise_cap = 4096;  // enumeration bound for p2 and subspace verification
    std::shared_ptr<detail::SharedAnalysis> cache;  // optional, reused across solves
};

namespace detail {

struct SolveContext {
    const FiniteAlgebra* base = nullptr;
    SolveOptions opts;
    std::shared_ptr<SharedAnalysis> shared;
    int depth = 0;

    static std::uint32_t mask_of(const std::vector<Elem>& dom) {
        std::uint32_t m = 0;
        for (Elem e : dom) m |= 1u << e;
        return m;
    }

    const DomainAnalysis& strong_for(const std::vector<Elem>& dom) {
        std::uint32_t m = mask_of(dom);
        auto it = shared->strong_cache.find(m);
        if (it != shared->strong_cache.end()) return it->second;
        DomainAnalysis da;
        da.ra = restrict_algebra(*base, dom);
        da.strong = find_strong_subuniverse(da.ra.algebra, opts.caps);
        return shared->strong_cache.emplace(m, std::move(da)).first->second;
    }

    const VarLinear& linear_for(const std::vector<Elem>& dom) {
        std::uint32_t m = mask_of(dom);
        auto it = shared->linear_cache.find(m);
        if (it != shared->linear_cache.end()) return it->second;
        VarLinear vl;
        vl.ra = restrict_algebra(*base, dom);
        vl.sigma = minimal_full_linear(vl.ra.algebra, opts.caps).sigma;
        FiniteAlgebra q = quotient(vl.ra.algebra, vl.sigma);
        vl.group = linear_group_structure(q);
        vl.blocks.assign(vl.sigma.blocks, {});
        for (int e = 0; e < vl.ra.algebra.size; ++e)
            vl.blocks[vl.sigma.block_of[e]].push_back(vl.ra.embed[e]);
        for (int e = 0; e < q.size; ++e) vl.elem_of_coords[vl.group.coords[e]] = static_cast<Elem>(e);
        return shared->linear_cache.emplace(m, std::move(vl)).first->second;
    }

    void emit(TraceEvent ev) const {
        if (opts.trace) {
            ev.depth = depth;
            opts.trace(ev);
        }
    }
};

Verdict solve_rec(Instance inst, SolveContext& ctx);

// --- SolveLinear ---------------------------------------------------------------

struct LinearSolver {
    SolveContext& ctx;
    const Instance& inst;                 // consistency-enforced, all strong cases exhausted
    std::vector<const VarLinear*> vars;   // aligned with inst.vars
    std::vector<int> coord_offset;        // first target coordinate per variable
    AffineMap phi;

    LinearSolver(SolveContext& c, const Instance& i) : ctx(c), inst(i) {
        int nv = static_cast<int>(inst.vars.size());
        vars.resize(nv);
        coord_offset.resize(nv);
        int m = 0;
        for (int x = 0; x < nv; ++x) {
            vars[x] = &ctx.linear_for(inst.vars[x].domain);
            coord_offset[x] = m;
            m += static_cast<int>(vars[x]->group.gens.size());
        }
        phi.src_primes.clear();
        for (int x = 0; x < nv; ++x)
            for (std::size_t j = 0; j < vars[x]->group.gens.size(); ++j) {
                AffineForm f;
                f.prime = vars[x]->group.gen_prime[j];
                f.terms = {{static_cast<int>(phi.src_primes.size()), 1}};
                phi.src_primes.push_back(f.prime);
                phi.target.push_back(std::move(f));
            }
    }

    // phi(alpha) as a per-variable block of original-label elements
    std::vector<Elem> block_of(int x, const std::vector<Elem>& alpha) const {
        const VarLinear& vl = *vars[x];
        std::vector<Elem> cs(vl.group.gens.size());
        for (std::size_t j = 0; j < cs.size(); ++j)
            cs[j] = phi.target[coord_offset[x] + j].eval(alpha);
        auto it = vl.elem_of_coords.find(cs);
        if (it == vl.elem_of_coords.end())
            throw DiagnosticError("solve_linear: coordinates outside the quotient group");
        return vl.blocks[it->second];
    }

    // p0: membership of one point, by reducing every domain to its block and
    // solving the smaller instance by recursion
    bool p0(const Instance& probe, const std::vector<Elem>& alpha) const {
        Instance reduced = probe;
        for (std::size_t x = 0; x < reduced.vars.size(); ++x) {
            std::vector<Elem> blk = block_of(static_cast<int>(x), alpha);
            std::vector<Elem> inter;
            for (Elem e : blk)
                for (Elem d : reduced.vars[x].domain)
                    if (e == d) inter.push_back(e);
            if (inter.empty()) return false;
            reduced.vars[x].domain = std::move(inter);
        }
        ++ctx.depth;
        Verdict v = solve_rec(std::move(reduced), ctx);
        --ctx.depth;
        return v == Verdict::Sat;
    }

    // p1: semi-decision of fullness; returns the first failing probe point,
    // or nothing when the zero point and all unit vectors are inside
    std::optional<std::vector<Elem>> p1_missing(const Instance& probe) const {
        int m = phi.dimension();
        std::vector<Elem> alpha(m, 0);
        if (!p0(probe, alpha)) return alpha;
        for (int i = 0; i < m; ++i) {
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[i] = 1;
            if (!p0(probe, alpha)) return alpha;
        }
        return std::nullopt;
    }

    bool enumerate_points(const std::function<void(const std::vector<Elem>&)>& fn) const {
        if (phi.box_size() > ctx.opts.pointwise_cap) return false;
        int m = phi.dimension();
        std::vector<Elem> alpha(m, 0);
        while (true) {
            fn(alpha);
            int pos = m - 1;
            while (pos >= 0 && alpha[pos] + 1 == phi.src_primes[pos]) --pos;
            if (pos < 0) break;
            ++alpha[pos];
            for (int i = pos + 1; i < m; ++i) alpha[i] = 0;
        }
        return true;
    }

    // Per-prime row reduction of the difference vectors of a point set.
    struct AffineBasis {
        std::vector<Elem> origin;
        std::vector<int> primes;                       // per basis vector
        std::vector<std::vector<Elem>> vectors;        // over all source coords
    };

    AffineBasis affine_basis(const std::set<std::vector<Elem>>& pts) const {
        AffineBasis basis;
        basis.origin = *pts.begin();
        int m = phi.dimension();
        std::vector<int> prime_order;
        for (int q : phi.src_primes)
            if (std::find(prime_order.begin(), prime_order.end(), q) == prime_order.end())
                prime_order.push_back(q);
        for (int q : prime_order) {
            std::vector<int> qcoords;
            for (int i = 0; i < m; ++i)
                if (phi.src_primes[i] == q) qcoords.push_back(i);
            std::size_t t = qcoords.size();
            std::vector<std::vector<int>> mat;
            for (const auto& p : pts) {
                std::vector<int> r(t);
                bool zero = true;
                for (std::size_t j = 0; j < t; ++j) {
                    r[j] = ((p[qcoords[j]] - basis.origin[qcoords[j]]) % q + q) % q;
                    if (r[j]) zero = false;
                }
                if (!zero) mat.push_back(std::move(r));
            }
            std::size_t rank = 0;
            for (std::size_t col = 0; col < t && rank < mat.size(); ++col) {
                std::size_t sel = rank;
                while (sel < mat.size() && mat[sel][col] == 0) ++sel;
                if (sel == mat.size()) continue;
                std::swap(mat[rank], mat[sel]);
                int inv = mod_inverse(mat[rank][col], q);
                for (std::size_t j = 0; j < t; ++j) mat[rank][j] = (mat[rank][j] * inv) % q;
                for (std::size_t r = 0; r < mat.size(); ++r) {
                    if (r == rank || mat[r][col] == 0) continue;
                    int f = mat[r][col];
                    for (std::size_t j = 0; j < t; ++j)
                        mat[r][j] = ((mat[r][j] - f * mat[rank][j]) % q + q) % q;
                }
                ++rank;
            }
            for (std::size_t r = 0; r < rank; ++r) {
                std::vector<Elem> vec(m, 0);
                for (std::size_t j = 0; j < t; ++j) vec[qcoords[j]] = static_cast<Elem>(mat[r][j]);
                basis.vectors.push_back(std::move(vec));
                basis.primes.push_back(q);
            }
        }
        return basis;
    }

    // classification of an explicit point set: Empty, Full, a codimension-1
    // equation when one fits, otherwise the verified affine set itself
    SubspaceDescr classify_set(const std::set<std::vector<Elem>>& pts) const {
        SubspaceDescr d;
        if (pts.empty()) {
            d.tag = SubspaceDescr::Tag::Empty;
            return d;
        }
        if (static_cast<std::uint64_t>(pts.size()) == phi.box_size()) {
            d.tag = SubspaceDescr::Tag::Full;
            return d;
        }
        AffineBasis basis = affine_basis(pts);
        // the affine hull of pts must be pts itself, else the union is not
        // an affine subspace and the theory was violated upstream
        {
            std::uint64_t span = 1;
            for (int q : basis.primes) span *= static_cast<unsigned>(q);
            if (span != static_cast<std::uint64_t>(pts.size()))
                throw DiagnosticError("p2: union of components is not an affine subspace");
            std::set<std::vector<Elem>> hull;
            std::vector<int> coef(basis.vectors.size(), 0);
            int m = phi.dimension();
            while (true) {
                std::vector<Elem> p = basis.origin;
                for (std::size_t v = 0; v < basis.vectors.size(); ++v)
                    for (int i = 0; i < m; ++i)
                        p[i] = static_cast<Elem>((p[i] + coef[v] * basis.vectors[v][i]) %
                                                 phi.src_primes[i]);
                hull.insert(std::move(p));
                std::size_t pos = basis.vectors.size();
                while (pos > 0 && coef[pos - 1] + 1 == basis.primes[pos - 1]) --pos;
                if (pos == 0) break;
                ++coef[pos - 1];
                for (std::size_t v = pos; v < basis.vectors.size(); ++v) coef[v] = 0;
            }
            if (hull != pts)
                throw DiagnosticError("p2: union of components is not an affine subspace");
        }
        // prefer the codimension-1 equation form when the dimensions match
        if (basis.vectors.size() + 1 == static_cast<std::size_t>(phi.dimension())) {
            int m = phi.dimension();
            for (int q : std::set<int>(phi.src_primes.begin(), phi.src_primes.end())) {
                std::vector<int> qcoords;
                for (int i = 0; i < m; ++i)
                    if (phi.src_primes[i] == q) qcoords.push_back(i);
                std::size_t t = qcoords.size();
                // lambda orthogonal to every basis vector's q-block
                std::vector<std::vector<int>> rows;
                for (std::size_t v = 0; v < basis.vectors.size(); ++v) {
                    if (basis.primes[v] != q) continue;
                    std::vector<int> r(t);
                    for (std::size_t j = 0; j < t; ++j) r[j] = basis.vectors[v][qcoords[j]];
                    rows.push_back(std::move(r));
                }
                if (rows.size() + 1 != t) continue;  // free part lives over another prime
                std::vector<std::vector<int>> mat = rows;
                std::vector<int> pivot_col;
                std::size_t rank = 0;
                for (std::size_t col = 0; col < t && rank < mat.size(); ++col) {
                    std::size_t sel = rank;
                    while (sel < mat.size() && mat[sel][col] == 0) ++sel;
                    if (sel == mat.size()) continue;
                    std::swap(mat[rank], mat[sel]);
                    int inv = mod_inverse(mat[rank][col], q);
                    for (std::size_t j = 0; j < t; ++j) mat[rank][j] = (mat[rank][j] * inv) % q;
                    for (std::size_t r = 0; r < mat.size(); ++r) {
                        if (r == rank || mat[r][col] == 0) continue;
                        int f = mat[r][col];
                        for (std::size_t j = 0; j < t; ++j)
                            mat[r][j] = ((mat[r][j] - f * mat[rank][j]) % q + q) % q;
                    }
                    pivot_col.push_back(static_cast<int>(col));
                    ++rank;
                }
                if (rank + 1 != t) continue;
                int free_col = -1;
                for (std::size_t cc = 0; cc < t; ++cc)
                    if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(cc)) ==
                        pivot_col.end())
                        free_col = static_cast<int>(cc);
                if (free_col < 0) continue;
                std::vector<int> lambda(t, 0);
                lambda[free_col] = 1;
                for (std::size_t r = 0; r < rank; ++r)
                    lambda[pivot_col[r]] = ((-mat[r][free_col]) % q + q) % q;
                SubspaceDescr cand;
                cand.tag = SubspaceDescr::Tag::Equation;
                cand.prime = q;
                int c = 0;
                for (std::size_t j = 0; j < t; ++j)
                    if (lambda[j]) {
                        cand.coeffs.emplace_back(qcoords[j], static_cast<Elem>(lambda[j]));
                        c += lambda[j] * basis.origin[qcoords[j]];
                    }
                cand.constant = static_cast<Elem>(((c % q) + q) % q);
                if (static_cast<std::uint64_t>(pts.size()) !=
                    phi.box_size() / static_cast<unsigned>(q))
                    continue;
                bool all = true;
                for (const auto& p : pts)
                    if (!cand.member(p)) all = false;
                if (all) return cand;
            }
        }
        d.tag = SubspaceDescr::Tag::Points;
        d.points.assign(pts.begin(), pts.end());
        return d;
    }

    // p2: not-linked case; split into pair-graph components inside each
    // variable component, compute memberships pointwise, union within a
    // variable component and intersect across them
    SubspaceDescr p2(const Instance& probe) const {
        LinkReport rep = linked_components(probe);
        if (phi.box_size() > ctx.opts.pointwise_cap)
            throw CapError("p2: source box exceeds the pointwise enumeration cap",
                           static_cast<std::size_t>(phi.box_size()));
        std::set<std::vector<Elem>> result;
        bool first_vc = true;
        for (int vc = 0; vc < rep.var_components; ++vc) {
            // constraints of this variable component
            Instance sub = probe;
            sub.constraints.clear();
            for (const Constraint& c : probe.constraints)
                if (rep.var_component[c.scope[0]] == vc) sub.constraints.push_back(c);
            // pair components present on this variable component
            std::set<int> pcs;
            for (std::size_t x = 0; x < probe.vars.size(); ++x)
                if (rep.var_component[x] == vc)
                    for (auto& [val, cid] : rep.component_of[x]) pcs.insert(cid);
            std::set<std::vector<Elem>> fvc;
            for (int pc : pcs) {
                Instance piece = sub;
                bool empty = false;
                for (std::size_t x = 0; x < probe.vars.size(); ++x) {
                    if (rep.var_component[x] != vc) continue;
                    std::vector<Elem> dom;
                    for (Elem a : probe.vars[x].domain)
                        if (rep.component_of[x].at(a) == pc) dom.push_back(a);
                    if (dom.empty()) {
                        empty = true;
                        break;
                    }
                    piece.vars[x].domain = std::move(dom);
                }
                if (empty) continue;
                enumerate_points([&](const std::vector<Elem>& alpha) {
                    if (p0(piece, alpha)) fvc.insert(alpha);
                });
            }
            if (first_vc) {
                result = std::move(fvc);
                first_vc = false;
            } else {
                std::set<std::vector<Elem>> inter;
                for (const auto& p : result)
                    if (fvc.count(p)) inter.insert(p);
                result = std::move(inter);
            }
            if (result.empty()) break;
        }
        if (first_vc) {  // no variable components at all: no constraints anywhere
            enumerate_points([&](const std::vector<Elem>& alpha) {
                if (p0(probe, alpha)) result.insert(alpha);
            });
        }
        return classify_set(result);
    }

    // p3: linked case under the converged dropping loop; single-equation
    // reconstruction from recovery probes
    SubspaceDescr p3(const Instance& probe) const {
        auto missing = p1_missing(probe);
        if (!missing)
            throw DiagnosticError("p3: instance became full before the subspace computation");
        std::vector<Elem> a = *missing;
        int m = phi.dimension();
        std::vector<int> bvals(m, -1);
        std::vector<int> js;
        for (int i = 0; i < m; ++i) {
            int found = -1;
            for (int b = 0; b < phi.src_primes[i]; ++b) {
                if (b == a[i]) continue;
                std::vector<Elem> probe_pt = a;
                probe_pt[i] = static_cast<Elem>(b);
                if (p0(probe, probe_pt)) {
                    if (found >= 0)
                        throw DiagnosticError("p3: multiple recovery values on one axis (not codimension 1)");
                    found = b;
                }
            }
            if (found >= 0) {
                bvals[i] = found;
                js.push_back(i);
            }
        }
        SubspaceDescr d;
        if (js.empty()) {
            d.tag = SubspaceDescr::Tag::Empty;
            bool verified = enumerate_points([&](const std::vector<Elem>& alpha) {
                if (p0(probe, alpha))
                    throw DiagnosticError("p3: nonempty membership with no recovery probes (not codimension 1)");
            });
            (void)verified;
            return d;
        }
        int q = phi.src_primes[js[0]];
        for (int i : js)
            if (phi.src_primes[i] != q)
                throw DiagnosticError("p3: recovery axes over different primes");
        d.tag = SubspaceDescr::Tag::Equation;
        d.prime = q;
        int c = 1;
        for (int i : js) {
            int coef = mod_inverse(bvals[i] - a[i], q);
            d.coeffs.emplace_back(i, static_cast<Elem>(coef));
            c += coef * a[i];
        }
        d.constant = static_cast<Elem>(((c % q) + q) % q);
        // pointwise verification of the emitted equation when feasible
        enumerate_points([&](const std::vector<Elem>& alpha) {
            if (p0(probe, alpha) != d.member(alpha))
                throw DiagnosticError("p3: emitted equation does not match membership");
        });
        return d;
    }

    void substitute_into_phi(const std::vector<AffineForm>& subst, std::vector<int> new_primes) {
        for (AffineForm& f : phi.target) {
            AffineForm nf;
            nf.prime = f.prime;
            int c = f.c;
            std::map<int, int> acc;
            for (auto [i, coef] : f.terms) {
                c += coef * subst[i].c;
                for (auto [j, coef2] : subst[i].terms) acc[j] += coef * coef2;
            }
            nf.c = static_cast<Elem>(((c % nf.prime) + nf.prime) % nf.prime);
            for (auto [j, v] : acc) {
                int r = ((v % nf.prime) + nf.prime) % nf.prime;
                if (r) nf.terms.emplace_back(j, static_cast<Elem>(r));
            }
            f = std::move(nf);
        }
        phi.src_primes = std::move(new_primes);
    }

    // replaces phi with phi restricted to the subspace: pivot elimination for
    // an equation, a fresh affine parametrization for an explicit point set
    void compose_with(const SubspaceDescr& d) {
        int m = phi.dimension();
        if (d.tag == SubspaceDescr::Tag::Equation) {
            int pivot = d.coeffs.front().first;
            Elem pivot_coef = d.coeffs.front().second;
            int q = d.prime;
            int inv = mod_inverse(pivot_coef, q);
            std::vector<int> newidx(m, -1);
            std::vector<int> new_primes;
            for (int i = 0; i < m; ++i) {
                if (i == pivot) continue;
                newidx[i] = static_cast<int>(new_primes.size());
                new_primes.push_back(phi.src_primes[i]);
            }
            std::vector<AffineForm> subst(m);
            for (int i = 0; i < m; ++i) {
                subst[i].prime = phi.src_primes[i];
                if (i != pivot) {
                    subst[i].terms = {{newidx[i], 1}};
                } else {
                    int c = d.constant * inv % q;
                    subst[i].c = static_cast<Elem>(((c % q) + q) % q);
                    for (auto [j, coef] : d.coeffs) {
                        if (j == pivot) continue;
                        int nc = (q - static_cast<int>(coef) * inv % q) % q;
                        if (nc) subst[i].terms.emplace_back(newidx[j], static_cast<Elem>(nc));
                    }
                }
            }
            substitute_into_phi(subst, std::move(new_primes));
            return;
        }
        // explicit affine set: alpha = origin + sum(t_v * basis_v)
        std::set<std::vector<Elem>> pts(d.points.begin(), d.points.end());
        AffineBasis basis = affine_basis(pts);
        std::vector<int> new_primes = basis.primes;
        std::vector<AffineForm> subst(m);
        for (int i = 0; i < m; ++i) {
            subst[i].prime = phi.src_primes[i];
            subst[i].c = basis.origin[i];
            for (std::size_t v = 0; v < basis.vectors.size(); ++v)
                if (basis.vectors[v][i])
                    subst[i].terms.emplace_back(static_cast<int>(v), basis.vectors[v][i]);
        }
        substitute_into_phi(subst, std::move(new_primes));
    }

    Verdict run() {
        {
            std::ostringstream os;
            os << "m=" << phi.dimension() << " primes=";
            for (int q : phi.src_primes) os << q << ",";
            ctx.emit({TraceEvent::Kind::LinearEnter, 0, os.str(), nullptr, -1, {}});
        }
        while (true) {
            if (!p1_missing(inst)) {
                ctx.emit({TraceEvent::Kind::Verdict, 0, "linear sat", nullptr, -1, {}});
                return Verdict::Sat;
            }
            int m_before = phi.dimension();
            // drop every constraint whose removal keeps the instance not-full
            std::vector<bool> dropped(inst.constraints.size(), false);
            Instance current = inst;
            for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
                Instance trial = current;
                trial.constraints.clear();
                for (std::size_t cj = 0; cj < inst.constraints.size(); ++cj)
                    if (!dropped[cj] && cj != ci) trial.constraints.push_back(inst.constraints[cj]);
                if (p1_missing(trial).has_value()) {
                    dropped[ci] = true;
                    ctx.emit({TraceEvent::Kind::Drop, 0, "constraint " + std::to_string(ci),
                              nullptr, -1, {}});
                }
            }
            Instance reduced = inst;
            reduced.constraints.clear();
            for (std::size_t cj = 0; cj < inst.constraints.size(); ++cj)
                if (!dropped[cj]) reduced.constraints.push_back(inst.constraints[cj]);

            LinkReport rep = linked_components(reduced);
            SubspaceDescr f = (rep.components <= 1) ? p3(reduced) : p2(reduced);
            if (f.tag == SubspaceDescr::Tag::Empty) {
                ctx.emit({TraceEvent::Kind::Verdict, 0, "linear unsat", nullptr, -1, {}});
                return Verdict::Unsat;
            }
            if (f.tag == SubspaceDescr::Tag::Full)
                throw DiagnosticError("solve_linear: dropped instance became full (loop invariant broken)");
            {
                std::ostringstream os;
                if (f.tag == SubspaceDescr::Tag::Equation) {
                    os << "codim1 prime=" << f.prime << " coeffs=";
                    for (auto [i, c] : f.coeffs) os << i << ":" << int(c) << ",";
                    os << " const=" << int(f.constant);
                } else {
                    os << "affine points=" << f.points.size();
                }
                ctx.emit({TraceEvent::Kind::Subspace, 0, os.str(), nullptr, -1, {}});
            }
            compose_with(f);
            std::ostringstream os;
            os << m_before << "->" << phi.dimension();
            ctx.emit({TraceEvent::Kind::Dim, 0, os.str(), nullptr, -1, {}});
            if (phi.dimension() >= m_before)
                throw DiagnosticError("solve_linear: dimension did not decrease");
        }
    }
};

inline Verdict solve_rec(Instance inst, SolveContext& ctx) {
    while (true) {
        ConsistencyResult cr = enforce_consistency(inst);
        if (cr.unsat) return Verdict::Unsat;
        inst = std::move(cr.inst);
        bool all_singleton = true;
        for (const Variable& v : inst.vars)
            if (v.domain.size() > 1) all_singleton = false;
        if (all_singleton) return Verdict::Sat;  // consistency certifies the unique assignment

        bool reduced = false;
        for (std::size_t x = 0; x < inst.vars.size() && !reduced; ++x) {
            if (inst.vars[x].domain.size() <= 1) continue;
            const DomainAnalysis& da = ctx.strong_for(inst.vars[x].domain);
            const StrongFinding& sf = da.strong;
            if (sf.kind == StrongKind::BA || sf.kind == StrongKind::Central ||
                sf.kind == StrongKind::PCBlock) {
                std::vector<Elem> target;
                for (Elem e : sf.subset) target.push_back(da.ra.embed[e]);
                std::sort(target.begin(), target.end());
                if (ctx.opts.trace) {
                    TraceEvent ev{TraceEvent::Kind::Reduce, 0, "", nullptr,
                                  static_cast<int>(x), target};
                    ev.detail = sf.kind == StrongKind::BA        ? "BA"
                                : sf.kind == StrongKind::Central ? "central"
                                                                 : "pc-block";
                    ev.pre = std::make_shared<Instance>(inst);
                    ctx.emit(std::move(ev));
                }
                inst.vars[x].domain = std::move(target);
                reduced = true;
            }
        }
        if (reduced) continue;
        LinearSolver ls(ctx, inst);
        return ls.run();
    }
}

}  // namespace detail

// The decision algorithm: consistency, strong-subuniverse reductions in
// declaration order, then SolveLinear when only linear structure remains.
inline Verdict solve_decision(const Instance& inst, const SolveOptions& opts = {}) {
    if (!inst.algebra->idempotent || !inst.algebra->wnu || !inst.algebra->special)
        throw InputError("solve: the algebra operation must be an idempotent special WNU");
    validate_instance(inst);
    detail::SolveContext ctx;
    ctx.base = inst.algebra.get();
    ctx.opts = opts;
    ctx.shared = opts.cache ? opts.cache : std::make_shared<detail::SharedAnalysis>();
    return detail::solve_rec(inst, ctx);
}

// Domain reduction with admissibility validation: B must be a nonempty
// BA or central subuniverse of the current domain, or the intersection of the
// domain with a block of a PC congruence with full cover.
inline Instance reduce_domain(const Instance& inst, int x, const std::vector<Elem>& b,
                              const SolveOptions& opts = {}) {
    if (x < 0 || x >= static_cast<int>(inst.vars.size()))
        throw InputError("reduce_domain: no such variable");
    const std::vector<Elem>& dom = inst.vars[x].domain;
    if (dom.size() <= 1) return inst;  // no-op on singleton domains
    if (b.empty()) throw InputError("reduce_domain: empty reduction");
    for (Elem e : b)
        if (std::find(dom.begin(), dom.end(), e) == dom.end())
            throw InputError("reduce_domain: reduction outside the current domain");
    RestrictedAlgebra ra = restrict_algebra(*inst.algebra, dom);
    std::vector<Elem> blocal;
    for (Elem e : b)
        for (int i = 0; i < ra.algebra.size; ++i)
            if (ra.embed[i] == e) blocal.push_back(static_cast<Elem>(i));
    std::sort(blocal.begin(), blocal.end());
    bool admitted = false;
    if (static_cast<int>(blocal.size()) < ra.algebra.size && is_closed_subset(ra.algebra, blocal)) {
        if (is_binary_absorbing(ra.algebra, blocal, opts.caps).absorbing) admitted = true;
        if (!admitted && is_central(ra.algebra, blocal, opts.caps)) admitted = true;
    }
    if (!admitted) {
        for (const Congruence& c : all_congruences(ra.algebra)) {
            if (c.is_full()) continue;
            CoverReport cov = irreducible_with_cover(ra.algebra, c);
            if (!cov.irreducible || cov.cover != rel_full(ra.algebra.size)) continue;
            IrreducibleReport rep = classify_irreducible(ra.algebra, c, cov.cover, opts.caps);
            if (rep.cls != IrrClass::PC) continue;
            for (const auto& blk : c.block_list())
                if (blk == blocal) admitted = true;
        }
    }
    if (!admitted)
        throw InputError("reduce_domain: subset is not a BA/central subuniverse or PC block");
    Instance out = inst;
    std::vector<Elem> sorted = b;
    std::sort(sorted.begin(), sorted.end());
    out.vars[x].domain = std::move(sorted);
    return out;
}

// Self-reduction to a concrete assignment: pin variables to the first value
// that keeps the instance satisfiable; the result is verified extensionally.
inline std::optional<std::vector<Elem>> extract_solution(const Instance& inst,
                                                         const SolveOptions& opts = {}) {
    if (solve_decision(inst, opts) == Verdict::Unsat) return std::nullopt;
    Instance work = inst;
    for (std::size_t x = 0; x < work.vars.size(); ++x) {
        bool pinned = false;
        for (Elem a : work.vars[x].domain) {
            Instance trial = work;
            trial.vars[x].domain = {a};
            if (solve_decision(trial, opts) == Verdict::Sat) {
                work = std::move(trial);
                pinned = true;
                break;
            }
        }
        if (!pinned)
            throw DiagnosticError("extract_solution: no value of a variable preserves satisfiability");
    }
    std::vector<Elem> assign(work.vars.size());
    for (std::size_t x = 0; x < work.vars.size(); ++x) assign[x] = work.vars[x].domain[0];
    for (const Constraint& c : inst.constraints) {
        bool hit = false;
        for (const Tuple& t : c.tuples) {
            bool eq = true;
            for (std::size_t i = 0; i < c.scope.size(); ++i)
                if (t[i] != assign[c.scope[i]]) eq = false;
            if (eq) hit = true;
        }
        if (!hit) throw DiagnosticError("extract_solution: assignment fails a constraint");
    }
    return assign;
}

}  // namespace zhukcsp

#endif
