#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "logfem/fd.hpp"
#include "logfem/fem.hpp"

using namespace logfem;

namespace {

// Edge form of the prism stiffness: each listed lattice edge contributes
// w * (h/6) * [[1,-1],[-1,1]]. Slots are [t1, t2, t3, b1, b2, b3].
PrismTable edge_formula(PrismMethod m, double h) {
    struct E {
        int a, b;
        double w;
    };
    const bool A = m == PrismMethod::A;
    const E edges[] = {{1, 2, A ? 2.0 : 1.0}, {4, 5, A ? 1.0 : 2.0}, {0, 1, A ? 1.0 : 2.0},
                       {3, 4, A ? 2.0 : 1.0}, {0, 3, 1.0},          {1, 4, 1.0},
                       {2, 5, 1.0}};
    PrismTable t{};
    for (const E& e : edges) {
        const double v = e.w * h / 6.0;
        t[e.a][e.a] += v;
        t[e.b][e.b] += v;
        t[e.a][e.b] -= v;
        t[e.b][e.a] -= v;
    }
    return t;
}

// Floating-point P1 stiffness of one tet, via the inverse Jacobian.
std::array<std::array<double, 4>, 4> float_tet_stiffness(const std::array<Node3, 4>& c, double h) {
    double J[3][3];
    for (int r = 0; r < 3; ++r) {
        J[r][0] = h * (c[r + 1].i - c[0].i);
        J[r][1] = h * (c[r + 1].j - c[0].j);
        J[r][2] = h * (c[r + 1].k - c[0].k);
    }
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    double inv[3][3];
    for (int r = 0; r < 3; ++r)
        for (int s = 0; s < 3; ++s) {
            const int r1 = (s + 1) % 3, r2 = (s + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
            inv[r][s] = (J[r1][c1] * J[r2][c2] - J[r1][c2] * J[r2][c1]) / det;
        }
    // grad lambda_{a} for a = 1..3 is column a-1 of inv
    std::array<std::array<double, 3>, 4> g{};
    for (int a = 1; a < 4; ++a)
        for (int d = 0; d < 3; ++d) g[a][d] = inv[d][a - 1];
    for (int d = 0; d < 3; ++d) g[0][d] = -(g[1][d] + g[2][d] + g[3][d]);
    const double vol = std::abs(det) / 6.0;
    std::array<std::array<double, 4>, 4> k{};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            k[a][b] = vol * (g[a][0] * g[b][0] + g[a][1] * g[b][1] + g[a][2] * g[b][2]);
    return k;
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

auto one = [](double, double, double) { return 1.0; };

}  // namespace

TEST(LocalStiffness, RowSumsVanishAndVolume) {
    const std::array<Node2, 3> base{Node2{0, 1}, Node2{0, 0}, Node2{1, 0}};
    for (auto m : {PrismMethod::A, PrismMethod::B}) {
        const auto t = local_prism_stiffness(base, 0, m, 0.25);
        for (int a = 0; a < 6; ++a) {
            double s = 0.0;
            for (int b = 0; b < 6; ++b) s += t[a][b];
            EXPECT_NEAR(s, 0.0, 1e-15);
        }
        long vol6 = 0;
        for (const auto& tet : prism_tets(Triangle{base, m}, 0)) vol6 += std::labs(signed_det(tet));
        EXPECT_EQ(vol6, 3);  // |T| = 3 * h^3/6 = h^3/2
    }
}

TEST(LocalStiffness, MatchesEdgeFormulaOnEveryPrism) {
    const int N = 4;
    const double h = 1.0 / N;
    const auto tri = build_tri_mesh(N);
    for (const auto& t : tri.triangles) {
        const auto ref = edge_formula(t.color, h);
        for (int k = 0; k < N; ++k) {
            const auto got = local_prism_stiffness(t.v, k, t.color, h);
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) EXPECT_NEAR(got[a][b], ref[a][b], 1e-13 * h);
        }
    }
}

TEST(LocalStiffness, EdgeCountTableMatchesEdgeFormula) {
    const double h = 0.25;
    for (PrismMethod m : {PrismMethod::A, PrismMethod::B}) {
        const auto got = prism_edge_stiffness({Node2{0, 1}, Node2{0, 0}, Node2{1, 0}}, 1, m, h);
        const auto ref = edge_formula(m, h);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b) EXPECT_NEAR(got[a][b], ref[a][b], 1e-16) << a << "," << b;
    }
    EXPECT_LE(local_stiffness_deviation(build_tri_mesh(4)), 1e-13);
}

TEST(LocalStiffness, MatchesFloatingPointGradients) {
    const double h = 0.125;
    const Triangle t{{Node2{3, 4}, Node2{3, 3}, Node2{4, 3}}, PrismMethod::B};
    for (const auto& tet : prism_tets(t, 2)) {
        const auto want = float_tet_stiffness(tet, h);
        const auto got = tet_stiffness_units(tet);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) EXPECT_NEAR(h / 6.0 * got.units[a][b], want[a][b], 1e-15);
    }
}

TEST(LocalStiffness, RejectsDegeneratePrism) {
    EXPECT_THROW(local_prism_stiffness({Node2{0, 0}, Node2{1, 0}, Node2{2, 0}}, 0, PrismMethod::A, 0.5),
                 std::invalid_argument);
    EXPECT_THROW(local_prism_stiffness({Node2{0, 1}, Node2{0, 0}, Node2{1, 0}}, 0, PrismMethod::A, 0.0),
                 std::invalid_argument);
    EXPECT_THROW(tet_stiffness_units({Node3{0, 0, 0}, Node3{1, 0, 0}, Node3{2, 0, 0}, Node3{0, 1, 0}}),
                 std::invalid_argument);
}

TEST(Stiffness, InteriorRowsMatchScaledStencil) {
    const int N = 4;
    const double h = 1.0 / N;
    const auto K = assemble_stiffness(split_prisms(build_tri_mesh(N)));
    const NodeIndexer ix(N);
    const int r = ix.interior_index({1, 1, 1});
    EXPECT_NEAR(K.coeff(r, r), 6 * h, 1e-15);
    EXPECT_NEAR(K.coeff(r, ix.interior_index({2, 1, 1})), -h, 1e-15);
    EXPECT_NEAR(K.coeff(r, ix.interior_index({1, 2, 1})), -h, 1e-15);
    EXPECT_NEAR(K.coeff(r, ix.interior_index({1, 1, 2})), -h, 1e-15);
    EXPECT_EQ(K.coeff(r, ix.interior_index({2, 2, 1})), 0.0);
    EXPECT_EQ(K.row_cols(r).size(), 4u);  // three interior axis neighbours plus the diagonal

    const int c = ix.interior_index({2, 2, 2});
    EXPECT_NEAR(K.coeff(c, c), 16.0 * h / 3.0, 1e-15);
    EXPECT_NEAR(K.coeff(c, ix.interior_index({2, 2, 1})), -2.0 * h / 3.0, 1e-15);
    EXPECT_NEAR(K.coeff(c, ix.interior_index({2, 2, 3})), -2.0 * h / 3.0, 1e-15);
    EXPECT_NEAR(K.coeff(c, ix.interior_index({1, 2, 2})), -h, 1e-15);
}

TEST(Stiffness, SymmetricMMatrix) {
    for (int N : {4, 6, 8}) {
        const auto K = assemble_stiffness(build_tri_mesh(N));
        EXPECT_TRUE(K.symmetric());
        EXPECT_EQ(K.asymmetry(), 0.0);
        const auto rep = check_m_matrix(K, N);
        EXPECT_TRUE(rep.pass()) << (rep.failures.empty() ? "" : rep.failures.front());
        for (int r = 0; r < K.dimension(); ++r) {
            double s = 0.0;
            for (double v : K.row_values(r)) s += v;
            EXPECT_GE(s, -1e-14);
        }
    }
}

TEST(Stiffness, StreamingMatchesMaterialized) {
    const auto tri = build_tri_mesh(6);
    const auto a = assemble_stiffness(tri);
    const auto b = assemble_stiffness(split_prisms(tri));
    EXPECT_EQ(stencil_equivalence(a, b), 0.0);
}

TEST(Load, LumpedWeights) {
    const int N = 4;
    const double h3 = std::pow(1.0 / N, 3);
    const auto m = split_prisms(build_tri_mesh(N));
    const auto b = assemble_load_lumped(m, one);
    const NodeIndexer ix(N);
    EXPECT_NEAR(b[ix.interior_index({1, 2, 3})], h3, 1e-17);
    EXPECT_NEAR(b[ix.interior_index({2, 2, 3})], 2.0 / 3.0 * h3, 1e-17);
    for (double v : assemble_load_lumped(m, [](double, double, double) { return 0.0; })) EXPECT_EQ(v, 0.0);
}

TEST(Load, LumpedWeightIsStarVolumeOverFour) {
    const int N = 6;
    const double h = 1.0 / N;
    const auto m = split_prisms(build_tri_mesh(N));
    const auto b = assemble_load_lumped(m, one);
    const auto counts = node_tet_counts(m);
    for (int r = 0; r < m.indexer.interior_count(); ++r) {
        const int node = m.indexer.index(m.indexer.interior_node(r));
        EXPECT_NEAR(b[r], counts[node] * h * h * h / 6.0 / 4.0, 1e-17);
    }
}

TEST(Quadrature, ExactForCubicMonomials) {
    const auto& rule = tet_rule_degree3();
    EXPECT_EQ(rule.exact_degree, 3);
    double wsum = 0.0;
    for (double w : rule.weights) {
        EXPECT_GT(w, 0.0);
        wsum += w;
    }
    EXPECT_NEAR(wsum, 1.0 / 6.0, 1e-15);
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b)
            for (int c = 0; a + b + c <= 3; ++c) {
                double q = 0.0;
                for (std::size_t p = 0; p < rule.points.size(); ++p)
                    q += rule.weights[p] * std::pow(rule.points[p][0], a) * std::pow(rule.points[p][1], b) *
                         std::pow(rule.points[p][2], c);
                const double exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                EXPECT_NEAR(q, exact, 1e-15) << a << b << c;
            }
}

TEST(Load, ExactMatchesLumpedForConstants) {
    const auto m = split_prisms(build_tri_mesh(4));
    const auto a = assemble_load_exact(m, one);
    const auto b = assemble_load_lumped(m, one);
    for (std::size_t r = 0; r < a.size(); ++r) EXPECT_NEAR(a[r], b[r], 1e-17);
}

TEST(Load, ExactMatchesAnalyticForLinearF) {
    auto f = [](double x, double y, double z) { return 1.0 + 2.0 * x - 3.0 * y + 0.5 * z; };
    for (int N : {4, 8}) {
        const double h = 1.0 / N;
        const auto m = split_prisms(build_tri_mesh(N));
        // integral of (linear f) * lambda_a over T is |T|/20 * (f_a + sum_b f_b)
        std::vector<double> want(static_cast<std::size_t>(m.indexer.interior_count()), 0.0);
        for (const Tet& t : m.tets) {
            const auto c = m.corners(t);
            std::array<double, 4> fv;
            double sum = 0.0;
            for (int a = 0; a < 4; ++a) sum += fv[a] = f(c[a].i * h, c[a].j * h, c[a].k * h);
            for (int a = 0; a < 4; ++a) {
                const int r = m.indexer.interior_index(c[a]);
                if (r >= 0) want[r] += h * h * h / 6.0 / 20.0 * (fv[a] + sum);
            }
        }
        const auto got = assemble_load_exact(m, f);
        for (std::size_t r = 0; r < got.size(); ++r) EXPECT_NEAR(got[r], want[r], 1e-16);
    }
}

TEST(Load, LinearFLumpedVersusExactIsFourthOrder) {
    auto f = [](double x, double y, double z) { return 1.0 + 2.0 * x - 3.0 * y + 0.5 * z; };
    std::vector<double> c;
    for (int N : {8, 16}) {
        const double h = 1.0 / N;
        const auto m = split_prisms(build_tri_mesh(N));
        const double d = max_abs_diff(assemble_load_exact(m, f), assemble_load_lumped(m, f));
        c.push_back(d / std::pow(h, 4));
    }
    EXPECT_GT(c[0], 0.0);
    EXPECT_NEAR(c[1] / c[0], 1.0, 0.25);
}

// Stars on this mesh are not point-symmetric, so the first moment of each hat
// function is O(h) and lumping differs from exact integration at first order.
TEST(Load, SmoothFRelativeDifferenceIsFirstOrder) {
    auto f = [](double x, double y, double z) {
        return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y) * std::sin(std::numbers::pi * z);
    };
    std::vector<double> c;
    for (int N : {8, 16, 32}) {
        const double h = 1.0 / N;
        const auto tri = build_tri_mesh(N);
        const auto lumped = assemble_load_lumped(split_prisms(tri), f);
        const double d = max_abs_diff(assemble_load_exact(tri, f), lumped) / norm_inf(lumped);
        c.push_back(d / h);
    }
    EXPECT_GT(c[0], 0.0);
    EXPECT_NEAR(c[2] / c[1], 1.0, 0.1);
}

TEST(StencilEquivalence, FemEqualsScaledFd) {
    auto f = [](double x, double y, double z) { return std::exp(x) * (1.0 + y * z); };
    for (int N : {4, 6, 8, 16}) {
        const auto m = split_prisms(build_tri_mesh(N));
        auto K = assemble_stiffness(m);
        K.set_rhs(assemble_load_lumped(m, f));
        EXPECT_LE(stencil_equivalence(K, build_fd_system_3d(N, f)), 1e-12) << "N=" << N;
    }
}

TEST(StencilEquivalence, FlippedPrismDeviates) {
    const auto tri = build_tri_mesh(4);
    const auto m = split_prisms_flipped(tri, 10, 1);
    auto K = assemble_stiffness(m);
    K.set_rhs(assemble_load_lumped(m, one));
    EXPECT_GT(stencil_equivalence(K, build_fd_system_3d(4, one)), 1e-3);
}

TEST(StencilEquivalence, DimensionMismatchThrows) {
    EXPECT_THROW(stencil_equivalence(build_fd_system_3d(4, one), build_fd_system_3d(6, one)),
                 std::invalid_argument);
}

TEST(Export, CoordinateFormat) {
    const auto K = build_fd_system_3d(4, one);
    std::stringstream ss;
    write_coordinate(ss, K);
    std::string pct, tag, kind;
    int rows = 0, cols = 0;
    std::size_t nnz = 0;
    ss >> pct >> tag >> kind >> rows >> cols >> nnz;
    EXPECT_EQ(pct, "%");
    EXPECT_EQ(rows, K.dimension());
    EXPECT_EQ(nnz, K.nonzeros());
    std::size_t lines = 0;
    int r = 0, c = 0;
    double v = 0.0;
    while (ss >> r >> c >> v) {
        EXPECT_EQ(v, K.coeff(r, c));
        ++lines;
    }
    EXPECT_EQ(lines, nnz);
}
