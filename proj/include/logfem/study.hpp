#pragma once

// Convergence experiments for the prism mesh. The default pipeline solves the
// FD representation with the z-sine solver; the Galerkin path (assembled on
// the mesh, solved with CG or banded Cholesky) is available for small N and
// must agree with it to solver tolerance.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "logfem/fd.hpp"
#include "logfem/fem.hpp"
#include "logfem/lattice.hpp"
#include "logfem/mesh.hpp"
#include "logfem/solve.hpp"

namespace logfem {

/// Exact solution u = w(x,y) sin(pi z) of -Laplace u = F(x,y) sin(pi z), where
/// -(wxx + wyy) + pi^2 w = F on the unit square.
struct Manufactured {
    std::string name;
    std::function<double(double, double)> w;
    std::function<double(double, double)> F;

    [[nodiscard]] double u(double x, double y, double z) const { return w(x, y) * std::sin(kPi * z); }
    [[nodiscard]] double f(double x, double y, double z) const { return F(x, y) * std::sin(kPi * z); }
    /// F~ = F - pi^2 w, so that -(wxx + wyy) = F~.
    [[nodiscard]] double F_tilde(double x, double y) const { return F(x, y) - kPi2 * w(x, y); }
};

/// w = sin(pi x) sin(pi y), F = 3 pi^2 w.
inline Manufactured default_manufactured() {
    return {"sin(pi x) sin(pi y)", [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); },
            [](double x, double y) { return 3.0 * kPi2 * std::sin(kPi * x) * std::sin(kPi * y); }};
}

struct HypothesisCheck {
    double corner_max = 0.0;       ///< max |F| over the four corners
    double centre_value = 0.0;     ///< F(1/2, 1/2)
    double sampled_max = 0.0;      ///< max |F| over a 201 x 201 sample
    double operator_defect = 0.0;  ///< max |M w - F| / ||F|| at sample points
    double pde_defect = 0.0;       ///< max |-Laplace u - f| / ||F|| at sample points
    std::vector<std::string> failures;
    [[nodiscard]] bool pass() const { return failures.empty(); }
};

namespace detail {

/// Sixth-order central second difference.
template <class Fn>
double d2_6th(Fn&& g, double t, double step) {
    static constexpr double c[4] = {-49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0};
    double s = c[0] * g(t);
    for (int a = 1; a <= 3; ++a) s += c[a] * (g(t + a * step) + g(t - a * step));
    return s / (step * step);
}

}  // namespace detail

inline HypothesisCheck check_hypotheses(const Manufactured& m) {
    HypothesisCheck c;
    for (double x : {0.0, 1.0})
        for (double y : {0.0, 1.0}) c.corner_max = std::max(c.corner_max, std::abs(m.F(x, y)));
    c.centre_value = m.F(0.5, 0.5);
    for (int j = 0; j <= 200; ++j)
        for (int i = 0; i <= 200; ++i) c.sampled_max = std::max(c.sampled_max, std::abs(m.F(i / 200.0, j / 200.0)));

    const double step = 1e-2;
    const double scale = std::max(c.sampled_max, std::numeric_limits<double>::min());
    for (double x : {0.13, 0.31, 0.5, 0.62, 0.87})
        for (double y : {0.11, 0.27, 0.5, 0.71, 0.93}) {
            const double wxx = detail::d2_6th([&](double t) { return m.w(t, y); }, x, step);
            const double wyy = detail::d2_6th([&](double t) { return m.w(x, t); }, y, step);
            const double mw = -(wxx + wyy) + kPi2 * m.w(x, y);
            c.operator_defect = std::max(c.operator_defect, std::abs(mw - m.F(x, y)) / scale);
            for (double z : {0.21, 0.5, 0.77}) {
                const double uxx = detail::d2_6th([&](double t) { return m.u(t, y, z); }, x, step);
                const double uyy = detail::d2_6th([&](double t) { return m.u(x, t, z); }, y, step);
                const double uzz = detail::d2_6th([&](double t) { return m.u(x, y, t); }, z, step);
                c.pde_defect = std::max(c.pde_defect, std::abs(-(uxx + uyy + uzz) - m.f(x, y, z)) / scale);
            }
        }
    if (c.corner_max > 1e-12 * scale) c.failures.push_back("F does not vanish at the corners");
    if (!(c.centre_value > 0.0)) c.failures.push_back("F(1/2,1/2) is not positive");
    if (c.centre_value < c.sampled_max * (1.0 - 1e-12)) c.failures.push_back("F(1/2,1/2) is not the max norm of F");
    if (c.operator_defect > 1e-10) c.failures.push_back("M w != F at sample points");
    if (c.pde_defect > 1e-10) c.failures.push_back("-Laplace u != f at sample points");
    return c;
}

struct TildeFBound {
    double analytic = 0.0;   ///< F~(1/2,1/2) from w
    double bound = 0.0;      ///< ||F||_inf / cosh(pi/2)
    double discrete = 0.0;   ///< F(1/2,1/2) - pi^2 W_{N/2,N/2}
    double discrete_rel_diff = 0.0;
    [[nodiscard]] bool holds() const { return analytic >= bound && discrete >= bound; }
};

inline TildeFBound check_tilde_F_bound(const Manufactured& m, int N) {
    TildeFBound t;
    const auto hyp = check_hypotheses(m);
    t.analytic = m.F_tilde(0.5, 0.5);
    t.bound = hyp.sampled_max / std::cosh(0.5 * kPi);
    const auto W = solve_Mh_2d(GridFn2D::sample(N, m.F));
    t.discrete = m.F(0.5, 0.5) - kPi2 * W.field(N / 2, N / 2);
    t.discrete_rel_diff = std::abs(t.discrete - t.analytic) / std::abs(t.analytic);
    return t;
}

// ---------------------------------------------------------------------------
// Least-squares fit y ~ a ln N + b

struct LinearFit {
    double a = 0.0;
    double b = 0.0;
    double max_rel_residual = 0.0;  ///< max |y - (a ln N + b)| / |y|
};

inline LinearFit fit_log(const std::vector<int>& ns, const std::vector<double>& ys) {
    if (ns.size() != ys.size() || ns.size() < 2) throw std::invalid_argument("fit_log: need >= 2 points");
    const double n = static_cast<double>(ns.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t a = 0; a < ns.size(); ++a) {
        const double x = std::log(static_cast<double>(ns[a]));
        sx += x;
        sy += ys[a];
        sxx += x * x;
        sxy += x * ys[a];
    }
    LinearFit fit;
    fit.a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.b = (sy - fit.a * sx) / n;
    for (std::size_t a = 0; a < ns.size(); ++a) {
        const double model = fit.a * std::log(static_cast<double>(ns[a])) + fit.b;
        fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(ys[a] - model) / std::abs(ys[a]));
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Reports

enum class SolverPath { SineFast, Cg, Direct };
enum class LoadKind { Lumped, Exact };

inline const char* to_string(SolverPath p) {
    switch (p) {
        case SolverPath::SineFast: return "sine-fast";
        case SolverPath::Cg: return "cg";
        case SolverPath::Direct: return "direct";
    }
    return "?";
}
inline const char* to_string(LoadKind l) { return l == LoadKind::Lumped ? "lumped" : "exact"; }
inline const char* to_string(WeightMode w) { return w == WeightMode::Paper ? "paper" : "unit"; }

struct StudyConfig {
    std::vector<int> n_list{8, 16, 32, 64, 128};
    double tol = kStudyTol;
    int threads = 1;
    SolverPath path = SolverPath::SineFast;
};

struct ErrorRecord {
    int N = 0;
    double h = 0, E = 0, s = 0, r = 0, residual = 0;
    double E_mid = 0;  ///< max error on the plane k = N/2
    int arg_i = 0, arg_j = 0, arg_k = 0;
};

struct GreenRecord {
    int N = 0;
    double G_centre = 0, residual = 0;
};

struct SeparabilityRecord {
    int N = 0;
    double q = 0;                  ///< max |U - W sin(pi z_k)| / h^2, W with shift pi^2
    double exact_discrepancy = 0;  ///< max |U - W' sin(pi z_k)|, W' with shift lambda_h
    double residual = 0;
};

struct Lemma3Record {
    int N = 0;
    double max_err = 0;      ///< max_ij |w - W|
    double ratio = 0;        ///< max_err / (h^2 ln N)
    int arg_i = 0, arg_j = 0;
    double iterm = 0;        ///< w(1/2,1/2) - W~_{N/2,N/2}
    double iterm_ratio = 0;  ///< iterm / (h^2 ln N F~(1/2,1/2))
    double green_identity_defect = 0;  ///< max |W~ - (ring W - h^2 G F~(1/2,1/2) / 3)|
    double barrier_excess = 0;         ///< max (|W~ - W| - B) with C0 = ratio; <= 0 when the barrier dominates
};

struct Provenance {
    std::string timestamp;
    std::string config_hash;
    std::string quadrature;
};

inline constexpr int kReportSchemaVersion = 1;

struct StudyReport {
    int schema_version = kReportSchemaVersion;
    std::string study;
    std::string manufactured;
    std::string weight = "paper";
    std::string load = "lumped";
    std::string solver = "sine-fast";
    double tol = kStudyTol;
    std::vector<ErrorRecord> records;
    std::vector<GreenRecord> green;
    std::vector<SeparabilityRecord> separability;
    std::vector<Lemma3Record> lemma3;
    std::optional<LinearFit> fit;
    std::optional<LinearFit> fit_drop_smallest;
    std::optional<double> c_star_estimate;  ///< min r_N over the upper half of the N list
    Provenance provenance;
};

namespace detail {

inline std::string current_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void stamp(StudyReport& rep, const StudyConfig& cfg) {
    std::string key = rep.study + "|" + rep.manufactured + "|" + rep.weight + "|" + rep.load + "|" + rep.solver;
    char buf[64];
    std::snprintf(buf, sizeof buf, "|%.17g", cfg.tol);
    key += buf;
    for (int n : cfg.n_list) key += "," + std::to_string(n);
    rep.provenance.config_hash = fnv1a_hex(key);
    rep.provenance.timestamp = current_timestamp();
}

inline void require_n_list(const std::vector<int>& ns) {
    if (ns.empty()) throw std::invalid_argument("study: empty N list");
    for (int n : ns) require_even_grid(n);
    if (!std::is_sorted(ns.begin(), ns.end())) throw std::invalid_argument("study: N list must be increasing");
}

/// Nodal solution of the 3D problem for one N.
inline GridFn3D solve_3d(const Manufactured& m, int N, WeightMode weight, LoadKind load, const StudyConfig& cfg,
                         double& residual) {
    auto f = [&](double x, double y, double z) { return m.f(x, y, z); };
    const double h = 1.0 / N;
    if (cfg.path == SolverPath::SineFast) {
        if (load == LoadKind::Lumped) {
            auto r = solve_sine_fast(N, f, weight, cfg.threads, cfg.tol);
            residual = r.residual;
            return std::move(r.u);
        }
        // Galerkin load on the prism mesh; the stiffness is h^3 L^h, so divide the load by h^3.
        const auto rhs = assemble_load_exact(build_tri_mesh(N), f);
        GridFn3D g = from_interior(N, rhs);
        for (double& v : g.values()) v /= h * h * h;
        auto r = solve_Lh_fast(g, weight, cfg.threads, cfg.tol);
        residual = r.residual;
        return std::move(r.u);
    }
    if (weight == WeightMode::Unit)
        throw std::invalid_argument("study: the unit-weight control has no mesh; use the sine-fast path");
    const TriMesh2D tri = build_tri_mesh(N);
    SparseSpd sys = assemble_stiffness(tri);
    if (load == LoadKind::Lumped) {
        const TetMesh3D mesh = split_prisms(tri);
        sys.set_rhs(assemble_load_lumped(mesh, f));
    } else {
        sys.set_rhs(assemble_load_exact(tri, f));
    }
    std::vector<double> x;
    if (cfg.path == SolverPath::Cg) {
        auto r = solve_cg(sys, cfg.tol);
        x = std::move(r.x);
    } else {
        x = solve_direct_small(sys);
    }
    const auto ax = sys.multiply(x);
    residual = max_abs_diff(ax, sys.rhs()) / std::max(norm_inf(sys.rhs()), std::numeric_limits<double>::min());
    return from_interior(N, x);
}

inline StudyReport error_study(const Manufactured& m, const StudyConfig& cfg, const std::string& name,
                               WeightMode weight, LoadKind load) {
    require_n_list(cfg.n_list);
    if (const auto hyp = check_hypotheses(m); !hyp.pass())
        throw std::invalid_argument("manufactured solution fails hypothesis check: " + hyp.failures.front());
    StudyReport rep;
    rep.study = name;
    rep.manufactured = m.name;
    rep.weight = to_string(weight);
    rep.load = to_string(load);
    rep.solver = to_string(cfg.path);
    rep.tol = cfg.tol;
    if (load == LoadKind::Exact) rep.provenance.quadrature = tet_rule_degree3().name + " (exact degree 3)";

    for (int N : cfg.n_list) {
        ErrorRecord rec;
        rec.N = N;
        rec.h = 1.0 / N;
        const GridFn3D U = solve_3d(m, N, weight, load, cfg, rec.residual);
        for (int k = 0; k <= N; ++k)
            for (int j = 0; j <= N; ++j)
                for (int i = 0; i <= N; ++i) {
                    const double e = std::abs(m.u(i * rec.h, j * rec.h, k * rec.h) - U(i, j, k));
                    if (e > rec.E) {
                        rec.E = e;
                        rec.arg_i = i, rec.arg_j = j, rec.arg_k = k;
                    }
                    if (2 * k == N) rec.E_mid = std::max(rec.E_mid, e);
                }
        rec.s = rec.E / (rec.h * rec.h);
        rec.r = rec.s / std::log(static_cast<double>(N));
        rep.records.push_back(rec);
    }
    if (rep.records.size() >= 2) {
        std::vector<int> ns;
        std::vector<double> ss;
        for (const auto& r : rep.records) ns.push_back(r.N), ss.push_back(r.s);
        rep.fit = fit_log(ns, ss);
        if (ns.size() >= 3) {
            ns.erase(ns.begin());
            ss.erase(ss.begin());
            rep.fit_drop_smallest = fit_log(ns, ss);
        }
    }
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t a = rep.records.size() / 2; a < rep.records.size(); ++a) c = std::min(c, rep.records[a].r);
    rep.c_star_estimate = c;
    stamp(rep, cfg);
    return rep;
}

}  // namespace detail

/// Nodal max error of the prism-mesh method with lumped load, per N.
inline StudyReport run_lower_bound_study(const Manufactured& m, const StudyConfig& cfg = {}) {
    return detail::error_study(m, cfg, "lower-bound", WeightMode::Paper, LoadKind::Lumped);
}

/// Same pipeline with gamma forced to 1 (standard 7-point scheme).
inline StudyReport run_control_study(const Manufactured& m, const StudyConfig& cfg = {}) {
    return detail::error_study(m, cfg, "control", WeightMode::Unit, LoadKind::Lumped);
}

/// Lower-bound study with the load integrated without lumping.
inline StudyReport run_noquad_study(const Manufactured& m, const StudyConfig& cfg = {}) {
    return detail::error_study(m, cfg, "no-quad", WeightMode::Paper, LoadKind::Exact);
}

inline StudyReport run_green_study(const StudyConfig& cfg) {
    detail::require_n_list(cfg.n_list);
    StudyReport rep;
    rep.study = "green";
    rep.solver = "sine-direct";
    rep.tol = cfg.tol;
    std::vector<GreenRecord> recs(cfg.n_list.size());
    parallel_for(static_cast<int>(recs.size()), cfg.threads, [&](int a) {
        const auto g = greens_function(cfg.n_list[a]);
        recs[a] = {cfg.n_list[a], g.centre, g.residual};
    });
    rep.green = std::move(recs);
    if (rep.green.size() >= 2) {
        std::vector<int> ns;
        std::vector<double> gs;
        for (const auto& r : rep.green) ns.push_back(r.N), gs.push_back(r.G_centre);
        rep.fit = fit_log(ns, gs);
    }
    detail::stamp(rep, cfg);
    return rep;
}

inline StudyReport run_separability_check(const Manufactured& m, const StudyConfig& cfg) {
    detail::require_n_list(cfg.n_list);
    StudyReport rep;
    rep.study = "separability";
    rep.manufactured = m.name;
    rep.solver = to_string(cfg.path);
    rep.tol = cfg.tol;
    for (int N : cfg.n_list) {
        SeparabilityRecord rec;
        rec.N = N;
        const double h = 1.0 / N;
        const GridFn3D U = detail::solve_3d(m, N, WeightMode::Paper, LoadKind::Lumped, cfg, rec.residual);
        const GridFn2D F = GridFn2D::sample(N, m.F);
        const GridFn2D W = solve_Mh_2d(F).field;
        const GridFn2D Wl = solve_Mh_2d(F, lambda_h(1, N)).field;
        double q = 0.0, d = 0.0;
        for (int k = 0; k <= N; ++k) {
            const double sz = std::sin(kPi * k * h);
            for (int j = 0; j <= N; ++j)
                for (int i = 0; i <= N; ++i) {
                    q = std::max(q, std::abs(U(i, j, k) - W(i, j) * sz));
                    d = std::max(d, std::abs(U(i, j, k) - Wl(i, j) * sz));
                }
        }
        rec.q = q / (h * h);
        rec.exact_discrepancy = d;
        rep.separability.push_back(rec);
    }
    detail::stamp(rep, cfg);
    return rep;
}

inline StudyReport run_lemma3_check(const Manufactured& m, const StudyConfig& cfg) {
    detail::require_n_list(cfg.n_list);
    StudyReport rep;
    rep.study = "lemma3";
    rep.manufactured = m.name;
    rep.solver = "sine-direct";
    rep.tol = cfg.tol;
    const double Ft_c = m.F_tilde(0.5, 0.5);
    for (int N : cfg.n_list) {
        Lemma3Record rec;
        rec.N = N;
        const double h = 1.0 / N;
        const double hl = h * h * std::log(static_cast<double>(N));
        const GridFn2D w = GridFn2D::sample(N, m.w);
        const GridFn2D W = solve_Mh_2d(GridFn2D::sample(N, m.F)).field;
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i <= N; ++i) {
                const double e = std::abs(w(i, j) - W(i, j));
                if (e > rec.max_err) rec.max_err = e, rec.arg_i = i, rec.arg_j = j;
            }
        rec.ratio = rec.max_err / hl;

        const GridFn2D Ft = GridFn2D::sample(N, [&](double x, double y) { return m.F_tilde(x, y); });
        const GridFn2D Wt = solve_tilde_W(Ft).field;
        const GridFn2D Wr = solve_ring_W(Ft).field;
        const GridFn2D G = greens_function(N).field;
        rec.iterm = m.w(0.5, 0.5) - Wt(N / 2, N / 2);
        rec.iterm_ratio = rec.iterm / (hl * Ft_c);
        const GridFn2D B = barrier_field(N, rec.ratio);
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i <= N; ++i) {
                const double split = Wr(i, j) - h * h * G(i, j) * Ft_c / 3.0;
                rec.green_identity_defect = std::max(rec.green_identity_defect, std::abs(Wt(i, j) - split));
                const double excess = std::abs(Wt(i, j) - W(i, j)) - B(i, j);
                rec.barrier_excess = (i == 0 && j == 0) ? excess : std::max(rec.barrier_excess, excess);
            }
        rep.lemma3.push_back(rec);
    }
    detail::stamp(rep, cfg);
    return rep;
}

}  // namespace logfem
