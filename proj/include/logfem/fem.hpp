#pragma once

// P1 finite elements on the extruded prism mesh: exact per-tetrahedron
// stiffness from integer barycentric gradients, lumped and exactly
// integrated loads, and the entrywise comparison against a scaled FD system.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "logfem/lattice.hpp"
#include "logfem/mesh.hpp"
#include "logfem/sparse.hpp"

namespace logfem {

/// Local stiffness of a lattice tetrahedron in units of h/6:
/// K_ab = (h/6) * units[a][b]. Exact for unit-determinant tetrahedra.
struct TetStiffnessUnits {
    std::array<std::array<double, 4>, 4> units{};
    long det = 0;  ///< 6 * signed volume / h^3
};

inline TetStiffnessUnits tet_stiffness_units(const std::array<Node3, 4>& c) {
    const Int3 e1 = diff(c[1], c[0]), e2 = diff(c[2], c[0]), e3 = diff(c[3], c[0]);
    TetStiffnessUnits out;
    out.det = dot(e1, cross(e2, e3));
    if (out.det == 0) throw std::invalid_argument("degenerate tetrahedron (zero volume)");
    // Rows of the inverse Jacobian, scaled by det: gradients of lambda_1..3 times det*h.
    std::array<Int3, 4> g;
    g[1] = cross(e2, e3);
    g[2] = cross(e3, e1);
    g[3] = cross(e1, e2);
    g[0] = {-(g[1][0] + g[2][0] + g[3][0]), -(g[1][1] + g[2][1] + g[3][1]), -(g[1][2] + g[2][2] + g[3][2])};
    const double adet = static_cast<double>(std::labs(out.det));
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out.units[a][b] = static_cast<double>(dot(g[a], g[b])) / adet;
    return out;
}

/// Prism vertex order used by the 6x6 local table: top copies of v1, v2, v3,
/// then bottom copies of v1, v2, v3.
using PrismTable = std::array<std::array<double, 6>, 6>;

/// Sum of exact tetrahedron stiffness integrals over the prism on `base`
/// spanning layer `layer`..`layer+1`, split with `method`.
inline PrismTable local_prism_stiffness(const std::array<Node2, 3>& base, int layer, PrismMethod method, double h) {
    const long area2 = static_cast<long>(base[1].i - base[0].i) * (base[2].j - base[0].j) -
                       static_cast<long>(base[2].i - base[0].i) * (base[1].j - base[0].j);
    if (area2 == 0) throw std::invalid_argument("local_prism_stiffness: degenerate prism base");
    if (!(h > 0.0)) throw std::invalid_argument("local_prism_stiffness: non-positive height");

    std::array<Node3, 6> verts;
    for (int s = 0; s < 3; ++s) {
        verts[s] = {base[s].i, base[s].j, layer + 1};
        verts[s + 3] = {base[s].i, base[s].j, layer};
    }
    PrismTable table{};
    for (const auto& tet : prism_tets(Triangle{base, method}, layer)) {
        std::array<int, 4> slot{};
        for (int a = 0; a < 4; ++a)
            for (int s = 0; s < 6; ++s)
                if (verts[s] == tet[a]) slot[a] = s;
        const auto k = tet_stiffness_units(tet);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) table[slot[a]][slot[b]] += h / 6.0 * k.units[a][b];
    }
    return table;
}

/// Edge form of the prism stiffness: every axis-parallel prism edge contributes
/// w (h/6) [[1,-1],[-1,1]], where w is the number of the prism's tetrahedra
/// containing it. The hypotenuse faces carry nothing.
inline PrismTable prism_edge_stiffness(const std::array<Node2, 3>& base, int layer, PrismMethod method, double h) {
    std::array<Node3, 6> verts;
    for (int s = 0; s < 3; ++s) {
        verts[s] = {base[s].i, base[s].j, layer + 1};
        verts[s + 3] = {base[s].i, base[s].j, layer};
    }
    const auto tets = prism_tets(Triangle{base, method}, layer);
    PrismTable table{};
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) {
            const Int3 d = diff(verts[b], verts[a]);
            if (!(is_axis_parallel(d, 0) || is_axis_parallel(d, 1) || is_axis_parallel(d, 2))) continue;
            int w = 0;
            for (const auto& t : tets)
                w += std::count(t.begin(), t.end(), verts[a]) && std::count(t.begin(), t.end(), verts[b]);
            const double v = w * h / 6.0;
            table[a][a] += v;
            table[b][b] += v;
            table[a][b] -= v;
            table[b][a] -= v;
        }
    return table;
}

/// Largest |local_prism_stiffness - prism_edge_stiffness| over every prism of
/// the extruded mesh, relative to h/6.
inline double local_stiffness_deviation(const TriMesh2D& tri) {
    const double h = 1.0 / tri.N;
    double worst = 0.0;
    for (const Triangle& t : tri.triangles)
        for (int k = 0; k < tri.N; ++k) {
            const auto a = local_prism_stiffness(t.v, k, t.color, h);
            const auto b = prism_edge_stiffness(t.v, k, t.color, h);
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c) worst = std::max(worst, std::abs(a[r][c] - b[r][c]) / (h / 6.0));
        }
    return worst;
}

namespace detail {

/// Unit-valued stiffness triplets (scale h/6 applied by the caller) for one tet.
inline void push_tet_triplets(const NodeIndexer& ix, const std::array<Node3, 4>& c, std::vector<Triplet>& out) {
    const auto k = tet_stiffness_units(c);
    std::array<int, 4> rows;
    for (int a = 0; a < 4; ++a) rows[a] = ix.interior_index(c[a]);
    for (int a = 0; a < 4; ++a) {
        if (rows[a] < 0) continue;
        for (int b = 0; b < 4; ++b)
            if (rows[b] >= 0) out.push_back({rows[a], rows[b], k.units[a][b]});
    }
}

inline SparseSpd finish_stiffness(int N, std::vector<Triplet> triplets) {
    // Sums of integer units are exact; scale once so the matrix is bitwise symmetric.
    SparseSpd units = SparseSpd::from_triplets(NodeIndexer(N).interior_count(), std::move(triplets));
    std::vector<Triplet> scaled;
    scaled.reserve(units.nonzeros());
    const double scale = 1.0 / (6.0 * N);
    for (int r = 0; r < units.dimension(); ++r) {
        const auto cols = units.row_cols(r);
        const auto vals = units.row_values(r);
        for (std::size_t p = 0; p < cols.size(); ++p) scaled.push_back({r, cols[p], vals[p] * scale});
    }
    return SparseSpd::from_triplets(units.dimension(), std::move(scaled));
}

}  // namespace detail

/// Galerkin stiffness over interior nodes, homogeneous Dirichlet data eliminated.
/// Accumulation follows the tet order of the mesh.
inline SparseSpd assemble_stiffness(const TetMesh3D& mesh) {
    std::vector<Triplet> trip;
    trip.reserve(mesh.tets.size() * 16);
    for (const Tet& t : mesh.tets) detail::push_tet_triplets(mesh.indexer, mesh.corners(t), trip);
    return detail::finish_stiffness(mesh.N, std::move(trip));
}

/// Same assembly, streaming tetrahedra straight from the triangulation.
inline SparseSpd assemble_stiffness(const TriMesh2D& tri) {
    const NodeIndexer ix(tri.N);
    std::vector<Triplet> trip;
    trip.reserve(tri.triangles.size() * 3 * static_cast<std::size_t>(tri.N) * 16);
    for_each_tet(tri, [&](const std::array<Node3, 4>& c) { detail::push_tet_triplets(ix, c, trip); });
    return detail::finish_stiffness(tri.N, std::move(trip));
}

/// Lumped load: f at the node times a quarter of the node's star volume.
template <class F>
std::vector<double> assemble_load_lumped(const TetMesh3D& mesh, F&& f) {
    const NodeIndexer& ix = mesh.indexer;
    std::vector<long> star(static_cast<std::size_t>(ix.node_count()), 0);
    for (const Tet& t : mesh.tets) {
        const long v = std::labs(signed_det(mesh.corners(t)));
        for (int n : t) star[n] += v;
    }
    const double h = 1.0 / mesh.N;
    std::vector<double> rhs(static_cast<std::size_t>(ix.interior_count()));
    for (int r = 0; r < ix.interior_count(); ++r) {
        const Node3 p = ix.interior_node(r);
        // (1/4) * sum |T| = (1/4) * units * h^3 / 6
        const double weight = static_cast<double>(star[ix.index(p)]) * (h * h * h) / 24.0;
        rhs[r] = weight * f(p.i * h, p.j * h, p.k * h);
    }
    return rhs;
}

struct QuadratureRule {
    std::string name;
    int exact_degree = 0;
    std::vector<std::array<double, 3>> points;  ///< reference-tet coordinates (xi1, xi2, xi3)
    std::vector<double> weights;                ///< sum to 1/6, the reference volume
};

/// Collapsed (Duffy) 3x3x3 Gauss-Legendre product rule on the reference
/// tetrahedron. All weights positive; exact for total degree <= 3.
inline const QuadratureRule& tet_rule_degree3() {
    static const QuadratureRule rule = [] {
        QuadratureRule q;
        q.name = "collapsed Gauss-Legendre 3x3x3";
        q.exact_degree = 3;
        const double r = 0.5 * std::sqrt(0.6);
        const std::array<double, 3> x{0.5 - r, 0.5, 0.5 + r};
        const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) {
                    const double u = x[a], v = x[b], s = x[c];
                    q.points.push_back({u, (1.0 - u) * v, (1.0 - u) * (1.0 - v) * s});
                    q.weights.push_back(w[a] * w[b] * w[c] * (1.0 - u) * (1.0 - u) * (1.0 - v));
                }
        return q;
    }();
    return rule;
}

namespace detail {

template <class F>
void add_exact_tet_load(const NodeIndexer& ix, const std::array<Node3, 4>& c, double h, const QuadratureRule& rule,
                        F& f, std::vector<double>& rhs) {
    std::array<int, 4> rows;
    bool any = false;
    for (int a = 0; a < 4; ++a) {
        rows[a] = ix.interior_index(c[a]);
        any = any || rows[a] >= 0;
    }
    if (!any) return;
    const Int3 e1 = diff(c[1], c[0]), e2 = diff(c[2], c[0]), e3 = diff(c[3], c[0]);
    const double jac = static_cast<double>(std::labs(dot(e1, cross(e2, e3)))) * h * h * h;
    std::array<double, 4> acc{};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& xi = rule.points[q];
        const double x = h * (c[0].i + xi[0] * e1[0] + xi[1] * e2[0] + xi[2] * e3[0]);
        const double y = h * (c[0].j + xi[0] * e1[1] + xi[1] * e2[1] + xi[2] * e3[1]);
        const double z = h * (c[0].k + xi[0] * e1[2] + xi[1] * e2[2] + xi[2] * e3[2]);
        const double fw = rule.weights[q] * f(x, y, z);
        acc[0] += fw * (1.0 - xi[0] - xi[1] - xi[2]);
        acc[1] += fw * xi[0];
        acc[2] += fw * xi[1];
        acc[3] += fw * xi[2];
    }
    for (int a = 0; a < 4; ++a)
        if (rows[a] >= 0) rhs[rows[a]] += jac * acc[a];
}

}  // namespace detail

/// Load without quadrature lumping: integral of f * phi_node, per tetrahedron,
/// with the degree-3 rule above.
template <class F>
std::vector<double> assemble_load_exact(const TetMesh3D& mesh, F&& f, const QuadratureRule& rule = tet_rule_degree3()) {
    std::vector<double> rhs(static_cast<std::size_t>(mesh.indexer.interior_count()), 0.0);
    const double h = 1.0 / mesh.N;
    for (const Tet& t : mesh.tets) detail::add_exact_tet_load(mesh.indexer, mesh.corners(t), h, rule, f, rhs);
    return rhs;
}

template <class F>
std::vector<double> assemble_load_exact(const TriMesh2D& tri, F&& f, const QuadratureRule& rule = tet_rule_degree3()) {
    const NodeIndexer ix(tri.N);
    std::vector<double> rhs(static_cast<std::size_t>(ix.interior_count()), 0.0);
    const double h = 1.0 / tri.N;
    for_each_tet(tri, [&](const std::array<Node3, 4>& c) { detail::add_exact_tet_load(ix, c, h, rule, f, rhs); });
    return rhs;
}

/// Largest entrywise deviation between two systems, matrix entries normalized
/// by the largest |entry| of `reference`, rhs entries by its largest |rhs|.
/// Entries absent from one pattern count as zero.
inline double stencil_equivalence(const SparseSpd& candidate, const SparseSpd& reference) {
    if (candidate.dimension() != reference.dimension())
        throw std::invalid_argument("stencil_equivalence: dimension mismatch (" +
                                    std::to_string(candidate.dimension()) + " vs " +
                                    std::to_string(reference.dimension()) + ")");
    double scale = 0.0;
    for (int r = 0; r < reference.dimension(); ++r)
        for (double v : reference.row_values(r)) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) scale = 1.0;

    double dev = 0.0;
    auto one_way = [&](const SparseSpd& a, const SparseSpd& b) {
        for (int r = 0; r < a.dimension(); ++r) {
            const auto cols = a.row_cols(r);
            const auto vals = a.row_values(r);
            for (std::size_t p = 0; p < cols.size(); ++p)
                dev = std::max(dev, std::abs(vals[p] - b.coeff(r, cols[p])) / scale);
        }
    };
    one_way(candidate, reference);
    one_way(reference, candidate);

    const double rhs_scale = norm_inf(reference.rhs());
    const double rhs_dev = max_abs_diff(candidate.rhs(), reference.rhs());
    dev = std::max(dev, rhs_scale > 0.0 ? rhs_dev / rhs_scale : rhs_dev);
    return dev;
}

}  // namespace logfem
