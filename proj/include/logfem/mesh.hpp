#pragma once

// Structured triangulation of the unit square and its prism/tetrahedron
// extrusion to the unit cube. All geometry is integer-lattice exact; h = 1/N
// is applied only when a caller evaluates coordinates.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "logfem/lattice.hpp"

namespace logfem {

/// Prism partition method. Each triangle of the 2D mesh carries one; the
/// prisms above it use that method in every layer.
enum class PrismMethod : std::uint8_t { A, B };

inline char to_char(PrismMethod m) { return m == PrismMethod::A ? 'A' : 'B'; }

/// Right isoceles lattice triangle. v[1] is the right-angle vertex and v[0],
/// v[2] its leg neighbours, so v[0]-v[2] is the hypotenuse. v[2] lies along x
/// from v[1] in anti-diagonal cells and along y in main-diagonal cells; with a
/// single convention the two prism methods would disagree on the face
/// diagonals along the quadrant boundaries.
struct Triangle {
    std::array<Node2, 3> v;
    PrismMethod color = PrismMethod::A;
};

struct TriMesh2D {
    int N = 0;
    std::vector<Triangle> triangles;
};

namespace detail {

inline Triangle make_triangle(Node2 right, Node2 along_x, Node2 along_y, PrismMethod c, bool v3_along_x) {
    if (v3_along_x) return Triangle{{along_y, right, along_x}, c};
    return Triangle{{along_x, right, along_y}, c};
}

}  // namespace detail

/// Triangulation of (0,1)^2 on the N x N grid. Cells in the lower-left and
/// upper-right quadrants carry the anti-diagonal, the other two quadrants the
/// main diagonal, so the centre node touches only four triangles. The B
/// triangle of a cell is the one holding its lower-left corner (lower-left
/// quadrant), upper-right corner (upper-right), upper-left corner (lower-right)
/// or lower-right corner (upper-left); its sibling is A.
inline TriMesh2D build_tri_mesh(int N) {
    require_even_grid(N);
    using detail::make_triangle;
    constexpr auto A = PrismMethod::A;
    constexpr auto B = PrismMethod::B;

    TriMesh2D mesh;
    mesh.N = N;
    mesh.triangles.reserve(static_cast<std::size_t>(2) * N * N);
    const int half = N / 2;
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            const Node2 ll{i, j}, lr{i + 1, j}, ul{i, j + 1}, ur{i + 1, j + 1};
            const bool left = i < half;
            const bool lower = j < half;
            if (left == lower) {
                // anti-diagonal ul-lr
                const bool ll_is_b = left;  // lower-left quadrant shades the lower-left corner
                mesh.triangles.push_back(make_triangle(ll, lr, ul, ll_is_b ? B : A, true));
                mesh.triangles.push_back(make_triangle(ur, ul, lr, ll_is_b ? A : B, true));
            } else {
                // main diagonal ll-ur
                const bool ul_is_b = !left;  // lower-right quadrant shades the upper-left corner
                mesh.triangles.push_back(make_triangle(lr, ll, ur, ul_is_b ? A : B, false));
                mesh.triangles.push_back(make_triangle(ul, ur, ll, ul_is_b ? B : A, false));
            }
        }
    }
    return mesh;
}

/// The three tetrahedra of one prism, as (top, bottom) vertex copies of the
/// triangle's v1, v2, v3 (array slots 0, 1, 2).
inline std::array<std::array<Node3, 4>, 3> prism_tets(const Triangle& t, int k) {
    std::array<Node3, 3> b, u;
    for (int s = 0; s < 3; ++s) {
        b[s] = {t.v[s].i, t.v[s].j, k};
        u[s] = {t.v[s].i, t.v[s].j, k + 1};
    }
    if (t.color == PrismMethod::A)
        return {{{u[0], u[1], u[2], b[0]}, {u[1], u[2], b[0], b[1]}, {u[2], b[0], b[1], b[2]}}};
    return {{{b[0], b[1], b[2], u[0]}, {b[1], b[2], u[0], u[1]}, {b[2], u[0], u[1], u[2]}}};
}

/// Visit every tetrahedron of the extruded mesh in a fixed order (triangle,
/// then layer, then tet within prism) without materializing the mesh.
/// `method(t, k)` may override the method of prism (triangle t, layer k).
template <class Fn, class Method>
void for_each_tet(const TriMesh2D& tri, Fn&& fn, Method&& method) {
    for (std::size_t t = 0; t < tri.triangles.size(); ++t)
        for (int k = 0; k < tri.N; ++k) {
            Triangle p = tri.triangles[t];
            p.color = method(t, k);
            for (const auto& tet : prism_tets(p, k)) fn(tet);
        }
}

template <class Fn>
void for_each_tet(const TriMesh2D& tri, Fn&& fn) {
    for_each_tet(tri, std::forward<Fn>(fn), [&](std::size_t t, int) { return tri.triangles[t].color; });
}

using Tet = std::array<int, 4>;

struct TetMesh3D {
    int N = 0;
    NodeIndexer indexer;
    std::vector<Tet> tets;

    [[nodiscard]] bool is_boundary(int node) const { return indexer.on_boundary(node); }
    [[nodiscard]] std::array<Node3, 4> corners(const Tet& t) const {
        return {indexer.node(t[0]), indexer.node(t[1]), indexer.node(t[2]), indexer.node(t[3])};
    }
};

template <class Method>
TetMesh3D split_prisms(const TriMesh2D& tri, Method&& method) {
    TetMesh3D mesh;
    mesh.N = tri.N;
    mesh.indexer = NodeIndexer(tri.N);
    mesh.tets.reserve(tri.triangles.size() * 3 * static_cast<std::size_t>(tri.N));
    for_each_tet(
        tri,
        [&](const std::array<Node3, 4>& c) {
            mesh.tets.push_back({mesh.indexer.index(c[0]), mesh.indexer.index(c[1]), mesh.indexer.index(c[2]),
                                 mesh.indexer.index(c[3])});
        },
        std::forward<Method>(method));
    return mesh;
}

inline TetMesh3D split_prisms(const TriMesh2D& tri) {
    return split_prisms(tri, [&](std::size_t t, int) { return tri.triangles[t].color; });
}

/// Extrusion with the method of the single prism (triangle t, layer k) swapped.
inline TetMesh3D split_prisms_flipped(const TriMesh2D& tri, std::size_t t, int k) {
    if (t >= tri.triangles.size() || k < 0 || k >= tri.N) throw std::out_of_range("split_prisms_flipped: no such prism");
    return split_prisms(tri, [&](std::size_t s, int l) {
        const PrismMethod c = tri.triangles[s].color;
        if (s != t || l != k) return c;
        return c == PrismMethod::A ? PrismMethod::B : PrismMethod::A;
    });
}

// ---------------------------------------------------------------------------
// Lattice geometry helpers

using Int3 = std::array<long, 3>;

inline Int3 diff(const Node3& a, const Node3& b) { return {a.i - b.i, a.j - b.j, a.k - b.k}; }

inline Int3 cross(const Int3& a, const Int3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline long dot(const Int3& a, const Int3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// 6 * signed volume in lattice units (h = 1).
inline long signed_det(const std::array<Node3, 4>& c) {
    return dot(diff(c[1], c[0]), cross(diff(c[2], c[0]), diff(c[3], c[0])));
}

/// Tet with its last two vertices swapped if needed so the determinant is positive.
inline Tet oriented(const TetMesh3D& mesh, Tet t) {
    if (signed_det(mesh.corners(t)) < 0) std::swap(t[2], t[3]);
    return t;
}

inline bool is_axis_parallel(const Int3& d, int axis) {
    for (int a = 0; a < 3; ++a)
        if ((a == axis) != (d[a] != 0)) return false;
    return true;
}

inline bool has_axis_edges(const std::array<Node3, 4>& c) {
    std::array<bool, 3> seen{};
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            const Int3 d = diff(c[b], c[a]);
            for (int ax = 0; ax < 3; ++ax)
                if (is_axis_parallel(d, ax)) seen[ax] = true;
        }
    return seen[0] && seen[1] && seen[2];
}

// ---------------------------------------------------------------------------
// Conformity

struct ConformityViolation {
    std::string kind;  ///< "duplicate-tet", "overshared-face", "mismatched-face", "open-interior-face"
    int tet_a = -1;
    int tet_b = -1;  ///< -1 when the violation involves a single tetrahedron
    std::array<int, 3> face{};
};

struct ConformityReport {
    std::vector<ConformityViolation> violations;
    std::size_t interior_faces = 0;
    std::size_t boundary_faces = 0;
    [[nodiscard]] bool pass() const { return violations.empty(); }
};

/// Face-matching conformity test. Interior faces must be shared by exactly two
/// tetrahedra; unmatched faces that are coplanar and overlap (share an edge)
/// are reported as a violating pair. When the tetrahedra fill the whole cube
/// (total volume N^3), every unmatched face must lie on the cube boundary.
inline ConformityReport check_conformity(const TetMesh3D& mesh) {
    ConformityReport rep;
    const auto& ix = mesh.indexer;

    std::vector<std::pair<std::array<int, 4>, int>> sorted_tets;
    sorted_tets.reserve(mesh.tets.size());
    long volume_units = 0;
    for (int t = 0; t < static_cast<int>(mesh.tets.size()); ++t) {
        std::array<int, 4> s = mesh.tets[t];
        std::sort(s.begin(), s.end());
        sorted_tets.emplace_back(s, t);
        volume_units += std::labs(signed_det(mesh.corners(mesh.tets[t])));
    }
    std::sort(sorted_tets.begin(), sorted_tets.end());
    for (std::size_t a = 1; a < sorted_tets.size(); ++a)
        if (sorted_tets[a].first == sorted_tets[a - 1].first)
            rep.violations.push_back({"duplicate-tet", sorted_tets[a - 1].second, sorted_tets[a].second, {}});

    using Face = std::array<int, 3>;
    std::vector<std::pair<Face, int>> faces;
    faces.reserve(mesh.tets.size() * 4);
    for (int t = 0; t < static_cast<int>(mesh.tets.size()); ++t) {
        std::array<int, 4> s = mesh.tets[t];
        std::sort(s.begin(), s.end());
        faces.push_back({{s[1], s[2], s[3]}, t});
        faces.push_back({{s[0], s[2], s[3]}, t});
        faces.push_back({{s[0], s[1], s[3]}, t});
        faces.push_back({{s[0], s[1], s[2]}, t});
    }
    std::sort(faces.begin(), faces.end());

    std::vector<std::pair<Face, int>> open;
    for (std::size_t a = 0; a < faces.size();) {
        std::size_t b = a;
        while (b < faces.size() && faces[b].first == faces[a].first) ++b;
        const std::size_t uses = b - a;
        if (uses == 1) {
            open.push_back(faces[a]);
        } else if (uses == 2) {
            ++rep.interior_faces;
        } else {
            for (std::size_t c = a + 1; c < b; ++c)
                rep.violations.push_back({"overshared-face", faces[a].second, faces[c].second, faces[a].first});
        }
        a = b;
    }

    // Group open faces by supporting plane, then pair faces that share an edge.
    using PlaneKey = std::tuple<long, long, long, long>;
    std::map<PlaneKey, std::vector<std::size_t>> planes;
    for (std::size_t f = 0; f < open.size(); ++f) {
        const Node3 p0 = ix.node(open[f].first[0]);
        Int3 n = cross(diff(ix.node(open[f].first[1]), p0), diff(ix.node(open[f].first[2]), p0));
        const long g = std::gcd(std::gcd(std::labs(n[0]), std::labs(n[1])), std::labs(n[2]));
        for (auto& c : n) c /= g;
        const long lead = n[0] != 0 ? n[0] : (n[1] != 0 ? n[1] : n[2]);
        if (lead < 0)
            for (auto& c : n) c = -c;
        planes[{n[0], n[1], n[2], dot(n, Int3{p0.i, p0.j, p0.k})}].push_back(f);
    }
    std::vector<bool> paired(open.size(), false);
    for (const auto& [key, members] : planes) {
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b) {
                const Face& fa = open[members[a]].first;
                const Face& fb = open[members[b]].first;
                std::vector<int> shared, rest_a, rest_b;
                for (int x : fa) (std::count(fb.begin(), fb.end(), x) ? shared : rest_a).push_back(x);
                for (int x : fb)
                    if (!std::count(fa.begin(), fa.end(), x)) rest_b.push_back(x);
                if (shared.size() < 2) continue;
                bool overlap = shared.size() == 3;
                if (!overlap) {
                    // coplanar triangles on a common edge overlap iff the opposite vertices are on the same side
                    const Node3 u = ix.node(shared[0]), v = ix.node(shared[1]);
                    const Int3 e = diff(v, u);
                    overlap = dot(cross(e, diff(ix.node(rest_a[0]), u)), cross(e, diff(ix.node(rest_b[0]), u))) > 0;
                }
                if (overlap) {
                    rep.violations.push_back(
                        {"mismatched-face", open[members[a]].second, open[members[b]].second, fa});
                    paired[members[a]] = paired[members[b]] = true;
                }
            }
    }

    const bool fills_cube = volume_units == 6L * mesh.N * mesh.N * mesh.N;
    for (std::size_t f = 0; f < open.size(); ++f) {
        const auto& face = open[f].first;
        bool on_boundary = false;
        const Node3 p0 = ix.node(face[0]), p1 = ix.node(face[1]), p2 = ix.node(face[2]);
        for (int c : {0, mesh.N}) {
            on_boundary = on_boundary || (p0.i == c && p1.i == c && p2.i == c) ||
                          (p0.j == c && p1.j == c && p2.j == c) || (p0.k == c && p1.k == c && p2.k == c);
        }
        if (on_boundary) {
            ++rep.boundary_faces;
        } else if (fills_cube && !paired[f]) {
            rep.violations.push_back({"open-interior-face", open[f].second, -1, face});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Incidence and invariant checks

inline std::vector<int> node_tet_counts(const TetMesh3D& mesh) {
    std::vector<int> counts(static_cast<std::size_t>(mesh.indexer.node_count()), 0);
    for (const Tet& t : mesh.tets)
        for (int v : t) ++counts[v];
    return counts;
}

inline int node_tet_count(const TetMesh3D& mesh, int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i > mesh.N || j > mesh.N || k > mesh.N)
        throw std::out_of_range("node_tet_count: node outside lattice");
    const int target = mesh.indexer.index({i, j, k});
    int count = 0;
    for (const Tet& t : mesh.tets)
        count += static_cast<int>(std::count(t.begin(), t.end(), target));
    return count;
}

/// Number of triangles incident to each 2D lattice node.
inline std::vector<int> node_triangle_counts(const TriMesh2D& tri) {
    std::vector<int> counts(static_cast<std::size_t>(tri.N + 1) * (tri.N + 1), 0);
    for (const Triangle& t : tri.triangles)
        for (const Node2& v : t.v) ++counts[v.i + (tri.N + 1) * v.j];
    return counts;
}

struct InvariantReport {
    std::vector<std::string> failures;
    [[nodiscard]] bool pass() const { return failures.empty(); }
    void fail(std::string msg) { failures.push_back(std::move(msg)); }
};

/// Pairs of triangles sharing an edge, keyed by the edge's sorted endpoints.
inline std::vector<std::pair<int, int>> edge_adjacent_pairs(const TriMesh2D& tri) {
    std::map<std::pair<Node2, Node2>, std::vector<int>> edges;
    for (int t = 0; t < static_cast<int>(tri.triangles.size()); ++t) {
        const auto& v = tri.triangles[t].v;
        for (int a = 0; a < 3; ++a) {
            Node2 p = v[a], q = v[(a + 1) % 3];
            if (q < p) std::swap(p, q);
            edges[{p, q}].push_back(t);
        }
    }
    std::vector<std::pair<int, int>> pairs;
    for (const auto& [e, ts] : edges)
        for (std::size_t a = 0; a < ts.size(); ++a)
            for (std::size_t b = a + 1; b < ts.size(); ++b) pairs.emplace_back(ts[a], ts[b]);
    return pairs;
}

inline InvariantReport check_tri_mesh(const TriMesh2D& tri) {
    InvariantReport rep;
    const int N = tri.N;
    if (tri.triangles.size() != static_cast<std::size_t>(2) * N * N)
        rep.fail("triangle count " + std::to_string(tri.triangles.size()) + " != 2N^2");
    for (std::size_t t = 0; t < tri.triangles.size(); ++t) {
        const auto& v = tri.triangles[t].v;
        const int dx3 = v[2].i - v[1].i, dy3 = v[2].j - v[1].j;
        const int dx1 = v[0].i - v[1].i, dy1 = v[0].j - v[1].j;
        const int ci = std::min({v[0].i, v[1].i, v[2].i}), cj = std::min({v[0].j, v[1].j, v[2].j});
        const bool anti = (ci < N / 2) == (cj < N / 2);
        const bool legs_x = std::abs(dx3) == 1 && dy3 == 0 && dx1 == 0 && std::abs(dy1) == 1;
        const bool legs_y = dx3 == 0 && std::abs(dy3) == 1 && std::abs(dx1) == 1 && dy1 == 0;
        if (anti ? !legs_x : !legs_y) {
            rep.fail("triangle " + std::to_string(t) + " violates the right-angle vertex convention");
            break;
        }
    }
    const auto counts = node_triangle_counts(tri);
    for (int j = 1; j < N; ++j)
        for (int i = 1; i < N; ++i) {
            const int expect = (i == N / 2 && j == N / 2) ? 4 : 6;
            if (counts[i + (N + 1) * j] != expect)
                rep.fail("node (" + std::to_string(i) + "," + std::to_string(j) + ") is in " +
                         std::to_string(counts[i + (N + 1) * j]) + " triangles, expected " + std::to_string(expect));
        }
    for (const auto& [a, b] : edge_adjacent_pairs(tri))
        if (tri.triangles[a].color == tri.triangles[b].color) {
            rep.fail("triangles " + std::to_string(a) + " and " + std::to_string(b) + " share an edge and a color");
            break;
        }
    return rep;
}

inline InvariantReport check_tet_mesh(const TetMesh3D& mesh) {
    InvariantReport rep;
    const int N = mesh.N;
    if (mesh.tets.size() != static_cast<std::size_t>(6) * N * N * N)
        rep.fail("tet count " + std::to_string(mesh.tets.size()) + " != 6N^3");
    for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
        const auto c = mesh.corners(mesh.tets[t]);
        if (std::labs(signed_det(c)) != 1) {
            rep.fail("tet " + std::to_string(t) + " volume differs from h^3/6");
            break;
        }
        if (signed_det(mesh.corners(oriented(mesh, mesh.tets[t]))) <= 0) {
            rep.fail("tet " + std::to_string(t) + " cannot be positively oriented");
            break;
        }
        if (!has_axis_edges(c)) {
            rep.fail("tet " + std::to_string(t) + " lacks an edge parallel to some axis");
            break;
        }
    }
    const auto conf = check_conformity(mesh);
    if (!conf.pass())
        rep.fail("conformity: " + std::to_string(conf.violations.size()) + " violation(s), first " +
                 conf.violations.front().kind);
    const auto counts = node_tet_counts(mesh);
    for (int k = 1; k < N; ++k)
        for (int j = 1; j < N; ++j)
            for (int i = 1; i < N; ++i) {
                const Rational g = gamma(i, j, N);
                const int expect = static_cast<int>(24 * g.num / g.den);
                const int got = counts[mesh.indexer.index({i, j, k})];
                if (got != expect) {
                    rep.fail("node (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                             ") is in " + std::to_string(got) + " tets, expected 24*gamma = " +
                             std::to_string(expect));
                    return rep;
                }
            }
    return rep;
}

// ---------------------------------------------------------------------------
// Plain-text export:
//   logfem-tetmesh 1
//   N <N>
//   nodes <count>      followed by one "i j k" line per node, linear index order
//   tets <count>       followed by one "a b c d" line per tet

inline void write_tet_mesh(std::ostream& os, const TetMesh3D& mesh) {
    os << "logfem-tetmesh 1\nN " << mesh.N << "\nnodes " << mesh.indexer.node_count() << '\n';
    for (int n = 0; n < mesh.indexer.node_count(); ++n) {
        const Node3 p = mesh.indexer.node(n);
        os << p.i << ' ' << p.j << ' ' << p.k << '\n';
    }
    os << "tets " << mesh.tets.size() << '\n';
    for (const Tet& t : mesh.tets) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

inline TetMesh3D read_tet_mesh(std::istream& is) {
    auto expect = [&](const std::string& word) {
        std::string got;
        if (!(is >> got) || got != word) throw std::runtime_error("tet mesh file: expected '" + word + "'");
    };
    int version = 0;
    expect("logfem-tetmesh");
    is >> version;
    if (version != 1) throw std::runtime_error("tet mesh file: unsupported version");
    TetMesh3D mesh;
    expect("N");
    is >> mesh.N;
    mesh.indexer = NodeIndexer(mesh.N);
    int nodes = 0;
    expect("nodes");
    is >> nodes;
    if (nodes != mesh.indexer.node_count()) throw std::runtime_error("tet mesh file: node count mismatch");
    for (int n = 0; n < nodes; ++n) {
        Node3 p;
        is >> p.i >> p.j >> p.k;
        if (mesh.indexer.index(p) != n) throw std::runtime_error("tet mesh file: node table out of order");
    }
    std::size_t count = 0;
    expect("tets");
    is >> count;
    mesh.tets.resize(count);
    for (Tet& t : mesh.tets) is >> t[0] >> t[1] >> t[2] >> t[3];
    if (!is) throw std::runtime_error("tet mesh file: truncated");
    return mesh;
}

}  // namespace logfem
