// logfem: mesh construction, verification, solves and studies from the shell.
//
// Exit codes: 0 success, 1 invariant or verification failure, 2 usage error,
// 3 solver failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "logfem/logfem.hpp"

using namespace logfem;

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kUsage = 2;
constexpr int kSolver = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    double tol = -1.0;  // < 0: command default
    int threads = default_threads();
    unsigned seed = 20240601;
};

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw UsageError("cannot open '" + path + "' for writing");
    return os;
}

void print(const std::string& key, double v) { std::cout << key << '=' << fmt17(v) << '\n'; }
void print(const std::string& key, long v) { std::cout << key << '=' << v << '\n'; }

// "T,K": flip the method of prism (triangle T, layer K).
std::pair<std::size_t, int> parse_flip(const std::string& s) {
    std::size_t t = 0;
    int k = 0;
    char comma = 0;
    std::istringstream is(s);
    if (!(is >> t >> comma >> k) || comma != ',') throw UsageError("--flip expects T,K");
    return {t, k};
}

TetMesh3D build_mesh(const TriMesh2D& tri, const std::string& flip) {
    if (flip.empty()) return split_prisms(tri);
    const auto [t, k] = parse_flip(flip);
    if (t >= tri.triangles.size() || k < 0 || k >= tri.N) throw UsageError("--flip: no such prism");
    return split_prisms_flipped(tri, t, k);
}

int cmd_mesh(int N, const std::string& export_path, bool check, const std::string& flip) {
    const auto tri = build_tri_mesh(N);
    const auto mesh = build_mesh(tri, flip);
    print("N", static_cast<long>(N));
    print("triangles", static_cast<long>(tri.triangles.size()));
    print("nodes", static_cast<long>(mesh.indexer.node_count()));
    print("tets", static_cast<long>(mesh.tets.size()));
    if (!export_path.empty()) {
        auto os = open_out(export_path);
        write_tet_mesh(os, mesh);
    }
    if (!check) return kOk;
    auto rep = check_tri_mesh(tri);
    const auto tet_rep = check_tet_mesh(mesh);
    rep.failures.insert(rep.failures.end(), tet_rep.failures.begin(), tet_rep.failures.end());
    const auto conf = check_conformity(mesh);
    print("interior_faces", static_cast<long>(conf.interior_faces));
    print("boundary_faces", static_cast<long>(conf.boundary_faces));
    for (const auto& f : rep.failures) std::cerr << "invariant violated: " << f << '\n';
    std::cout << "invariants=" << (rep.pass() ? "pass" : "fail") << '\n';
    return rep.pass() ? kOk : kInvariant;
}

int cmd_verify(int N, const Globals& g, const std::string& flip) {
    require_even_grid(N, 4);
    const auto m = default_manufactured();
    auto f = [&](double x, double y, double z) { return m.f(x, y, z); };
    const auto tri = build_tri_mesh(N);
    const auto mesh = build_mesh(tri, flip);

    auto K = assemble_stiffness(mesh);
    K.set_rhs(assemble_load_lumped(mesh, f));
    const double stencil = stencil_equivalence(K, build_fd_system_3d(N, f));
    const double local = local_stiffness_deviation(tri);
    const auto mm = check_m_matrix(K, N);

    // sampled positive definiteness, seeded
    std::mt19937 rng(g.seed);
    std::normal_distribution<double> n01;
    double min_form = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 8; ++s) {
        std::vector<double> x(static_cast<std::size_t>(K.dimension()));
        for (double& v : x) v = n01(rng);
        min_form = std::min(min_form, dot(x, K.multiply(x)) / dot(x, x));
    }

    print("stencil_deviation", stencil);
    print("local_stiffness_deviation", local);
    print("min_sampled_rayleigh", min_form);
    std::cout << "m_matrix=" << (mm.pass() ? "pass" : "fail") << '\n';

    std::vector<std::string> failed;
    if (!(stencil <= 1e-12)) failed.push_back("stencil equivalence deviation > 1e-12");
    if (!(local <= 1e-13)) failed.push_back("local stiffness deviates from the edge formula by > 1e-13");
    if (!mm.pass()) failed.push_back("M-matrix structure: " + mm.failures.front());
    if (!(min_form > 0.0)) failed.push_back("sampled quadratic form not positive");
    for (const auto& s : failed) std::cerr << "verification failed: " << s << '\n';
    return failed.empty() ? kOk : kInvariant;
}

int cmd_solve(int N, const std::string& path_name, bool no_quad, const std::string& out, const Globals& g) {
    const auto m = default_manufactured();
    StudyConfig cfg;
    cfg.n_list = {N};
    cfg.threads = g.threads;
    if (path_name == "cg") {
        cfg.path = SolverPath::Cg;
        cfg.tol = kCgTol;
    } else if (path_name == "direct") {
        cfg.path = SolverPath::Direct;
    }
    if (g.tol > 0.0) cfg.tol = g.tol;
    const auto rep = no_quad ? run_noquad_study(m, cfg) : run_lower_bound_study(m, cfg);
    const auto& r = rep.records.front();
    print("N", static_cast<long>(N));
    std::cout << "solver=" << rep.solver << "\nload=" << rep.load << '\n';
    print("E", r.E);
    print("s", r.s);
    print("r", r.r);
    print("E_mid", r.E_mid);
    print("residual", r.residual);
    std::cout << "argmax=" << r.arg_i << ',' << r.arg_j << ',' << r.arg_k << '\n';
    if (!out.empty()) {
        double residual = 0.0;
        const auto U = detail::solve_3d(m, N, WeightMode::Paper, no_quad ? LoadKind::Exact : LoadKind::Lumped, cfg,
                                        residual);
        auto os = open_out(out);
        os << "i,j,k,U,u\n";
        const double h = 1.0 / N;
        for (int k = 0; k <= N; ++k)
            for (int j = 0; j <= N; ++j)
                for (int i = 0; i <= N; ++i)
                    os << i << ',' << j << ',' << k << ',' << fmt17(U(i, j, k)) << ','
                       << fmt17(m.u(i * h, j * h, k * h)) << '\n';
    }
    return kOk;
}

std::vector<int> parse_n_list(const std::string& s) {
    std::vector<int> ns;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            ns.push_back(std::stoi(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw UsageError("--n-list: '" + cell + "' is not an integer");
        }
    }
    return ns;
}

void print_fit(const char* label, const std::optional<LinearFit>& fit) {
    if (!fit) return;
    std::cout << label << ".a=" << fmt17(fit->a) << '\n'
              << label << ".b=" << fmt17(fit->b) << '\n'
              << label << ".max_rel_residual=" << fmt17(fit->max_rel_residual) << '\n';
}

int cmd_study(const std::string& kind, const std::string& n_list, const std::string& csv, const std::string& json,
              const std::string& svg, const Globals& g) {
    StudyConfig cfg;
    if (!n_list.empty()) cfg.n_list = parse_n_list(n_list);
    if (g.tol > 0.0) cfg.tol = g.tol;
    cfg.threads = g.threads;
    const auto m = default_manufactured();

    StudyReport rep;
    if (kind == "lower-bound") rep = run_lower_bound_study(m, cfg);
    else if (kind == "control") rep = run_control_study(m, cfg);
    else if (kind == "no-quad") rep = run_noquad_study(m, cfg);
    else if (kind == "green") rep = run_green_study(cfg);
    else if (kind == "separability") rep = run_separability_check(m, cfg);
    else if (kind == "lemma3") rep = run_lemma3_check(m, cfg);
    else throw UsageError("unknown study '" + kind + "'");

    write_csv(std::cout, rep);
    print_fit("fit", rep.fit);
    print_fit("fit_drop_smallest", rep.fit_drop_smallest);
    if (rep.c_star_estimate) print("c_star_estimate", *rep.c_star_estimate);
    if (!csv.empty()) {
        auto os = open_out(csv);
        write_csv(os, rep);
    }
    if (!json.empty()) {
        auto os = open_out(json);
        write_json(os, rep);
    }
    if (!svg.empty()) {
        auto os = open_out(svg);
        write_svg(os, rep);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prism-mesh P1 finite elements on the unit cube: mesh, verify, solve, study"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--tol", g.tol, "solver tolerance (default depends on the command)")->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for randomized checks");

    int N = 0;
    std::string export_path, out, flip, n_list, csv, json, svg, kind;
    bool check = false, no_quad = false;

    auto* mesh = app.add_subcommand("mesh", "build the mesh and print its counts");
    mesh->add_option("--n", N, "grid count (even)")->required();
    mesh->add_option("--export", export_path, "write the tetrahedral mesh as text");
    mesh->add_flag("--check", check, "run every mesh invariant and the conformity check");
    mesh->add_option("--flip", flip, "swap the method of prism T,K (for mutation checks)");

    auto* verify = app.add_subcommand("verify", "FEM/FD stencil equivalence and local stiffness checks");
    verify->add_option("--n", N, "grid count (even, >= 4)")->required();
    verify->add_option("--flip", flip, "swap the method of prism T,K (for mutation checks)");

    auto* solve = app.add_subcommand("solve", "solve the default manufactured problem and print E_N");
    solve->add_option("--n", N, "grid count (even)")->required();
    auto* fast = solve->add_flag("--fast", "z-sine fast solver (default)");
    auto* cg = solve->add_flag("--cg", "Jacobi-preconditioned CG on the assembled system");
    auto* direct = solve->add_flag("--direct", "banded Cholesky on the assembled system");
    fast->excludes(cg)->excludes(direct);
    cg->excludes(direct);
    solve->add_flag("--no-quad", no_quad, "integrate the load without lumping");
    solve->add_option("--out", out, "write i,j,k,U,u as CSV");

    auto* study = app.add_subcommand("study", "run a study and emit CSV/JSON/SVG");
    study->add_option("kind", kind, "lower-bound | control | green | separability | lemma3 | no-quad")
        ->required()
        ->check(CLI::IsMember({"lower-bound", "control", "green", "separability", "lemma3", "no-quad"}));
    study->add_option("--n-list", n_list, "comma-separated N values");
    study->add_option("--csv", csv, "CSV output path");
    study->add_option("--json", json, "JSON report path");
    study->add_option("--svg", svg, "SVG plot path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*mesh) return cmd_mesh(N, export_path, check, flip);
        if (*verify) return cmd_verify(N, g, flip);
        if (*solve) return cmd_solve(N, *cg ? "cg" : (*direct ? "direct" : "fast"), no_quad, out, g);
        if (*study) return cmd_study(kind, n_list, csv, json, svg, g);
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
