#pragma once

// Finite-difference operators on the uniform lattice: the column-weighted
// 7-point operator L^h, its 2D companions (M^h, the 5-point Laplacian with and
// without the centre weight), the centre-node Green's function and the
// parabolic barrier.

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "logfem/lattice.hpp"
#include "logfem/sparse.hpp"
#include "logfem/spectral.hpp"

namespace logfem {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

/// Default acceptance for direct 2D solves (relative max-norm residual).
inline constexpr double kDirectResidualTol = 1e-10;

/// -(dxx + dyy + gamma_ij dzz) U at interior nodes; boundary entries of the result are 0.
inline GridFn3D apply_Lh(const GridFn3D& u, WeightMode mode = WeightMode::Paper) {
    const int N = u.N();
    const double ih2 = static_cast<double>(N) * N;
    GridFn3D out(N);
    for (int k = 1; k < N; ++k)
        for (int j = 1; j < N; ++j)
            for (int i = 1; i < N; ++i) {
                const double c = u(i, j, k);
                const double dxx = u(i - 1, j, k) - 2.0 * c + u(i + 1, j, k);
                const double dyy = u(i, j - 1, k) - 2.0 * c + u(i, j + 1, k);
                const double dzz = u(i, j, k - 1) - 2.0 * c + u(i, j, k + 1);
                out(i, j, k) = -ih2 * (dxx + dyy + gamma_value(i, j, N, mode) * dzz);
            }
    return out;
}

/// h^3 * L^h as a sparse system, rhs = h^3 * gamma_ij * f at interior nodes.
/// The scaling matches the Galerkin assembly on the prism mesh entry for entry.
template <class F>
SparseSpd build_fd_system_3d(int N, F&& f, WeightMode mode = WeightMode::Paper) {
    require_even_grid(N);
    const NodeIndexer ix(N);
    const double h = 1.0 / N;
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(ix.interior_count()) * 7);
    std::vector<double> rhs(static_cast<std::size_t>(ix.interior_count()));
    for (int r = 0; r < ix.interior_count(); ++r) {
        const Node3 p = ix.interior_node(r);
        const double g = gamma_value(p.i, p.j, N, mode);
        trip.push_back({r, r, h * (4.0 + 2.0 * g)});
        auto couple = [&](Node3 q, double v) {
            const int c = ix.interior_index(q);
            if (c >= 0) trip.push_back({r, c, v});
        };
        couple({p.i - 1, p.j, p.k}, -h);
        couple({p.i + 1, p.j, p.k}, -h);
        couple({p.i, p.j - 1, p.k}, -h);
        couple({p.i, p.j + 1, p.k}, -h);
        couple({p.i, p.j, p.k - 1}, -g * h);
        couple({p.i, p.j, p.k + 1}, -g * h);
        rhs[r] = h * h * h * g * f(p.i * h, p.j * h, p.k * h);
    }
    SparseSpd sys = SparseSpd::from_triplets(ix.interior_count(), std::move(trip));
    sys.set_rhs(std::move(rhs));
    return sys;
}

/// Unscaled 2D system -(dxx+dyy) + sigma * gamma_ij on the (N-1)^2 interior,
/// i fastest. Used as the sparse cross-check of the spectral 2D solves.
inline SparseSpd build_fd_system_2d(int N, double sigma, WeightMode mode = WeightMode::Paper) {
    require_even_grid(N);
    const int n = N - 1;
    const double ih2 = static_cast<double>(N) * N;
    std::vector<Triplet> trip;
    for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) {
            const int r = (i - 1) + n * (j - 1);
            trip.push_back({r, r, 4.0 * ih2 + sigma * gamma_value(i, j, N, mode)});
            if (i > 1) trip.push_back({r, r - 1, -ih2});
            if (i < n) trip.push_back({r, r + 1, -ih2});
            if (j > 1) trip.push_back({r, r - n, -ih2});
            if (j < n) trip.push_back({r, r + n, -ih2});
        }
    return SparseSpd::from_triplets(n * n, std::move(trip));
}

namespace detail {

inline GridFn2D weighted(const GridFn2D& F, WeightMode mode) {
    GridFn2D out(F.N());
    for (int j = 1; j < F.N(); ++j)
        for (int i = 1; i < F.N(); ++i) out(i, j) = gamma_value(i, j, F.N(), mode) * F(i, j);
    return out;
}

}  // namespace detail

struct Solve2D {
    GridFn2D field;
    double residual = 0.0;
};

/// M^h W = gamma F with shift `shift` (pi^2 by default; lambda_h gives the
/// exactly separable variant). Zero boundary.
inline Solve2D solve_Mh_2d(const GridFn2D& F, double shift = kPi2, WeightMode mode = WeightMode::Paper,
                           double tol = kDirectResidualTol) {
    const int N = F.N();
    require_even_grid(N);
    const double cw = mode == WeightMode::Unit ? 1.0 : gamma(N / 2, N / 2, N).value();
    const ShiftedPoisson2D op(N, shift, cw);
    Solve2D out;
    out.field = op.solve_checked(detail::weighted(F, mode), tol, &out.residual, "M^h solve");
    return out;
}

/// -(dxx+dyy) W~ = gamma F~, zero boundary.
inline Solve2D solve_tilde_W(const GridFn2D& Ft, double tol = kDirectResidualTol) {
    require_even_grid(Ft.N());
    const ShiftedPoisson2D op(Ft.N(), 0.0, 1.0);
    Solve2D out;
    out.field = op.solve_checked(detail::weighted(Ft, WeightMode::Paper), tol, &out.residual, "W~ solve");
    return out;
}

/// -(dxx+dyy) W = F~ (plain 5-point Poisson), zero boundary.
inline Solve2D solve_ring_W(const GridFn2D& Ft, double tol = kDirectResidualTol) {
    require_even_grid(Ft.N());
    const ShiftedPoisson2D op(Ft.N(), 0.0, 1.0);
    GridFn2D rhs(Ft.N());
    for (int j = 1; j < Ft.N(); ++j)
        for (int i = 1; i < Ft.N(); ++i) rhs(i, j) = Ft(i, j);
    Solve2D out;
    out.field = op.solve_checked(rhs, tol, &out.residual, "ring-W solve");
    return out;
}

struct GreensFunction {
    GridFn2D field;
    double centre = 0.0;
    double residual = 0.0;
};

/// -(dxx+dyy) G = h^-2 at (N/2, N/2), 0 elsewhere, zero boundary.
inline GreensFunction greens_function(int N, double tol = kDirectResidualTol) {
    require_even_grid(N);
    GridFn2D rhs(N);
    rhs(N / 2, N / 2) = static_cast<double>(N) * N;
    const ShiftedPoisson2D op(N, 0.0, 1.0);
    GreensFunction g;
    g.field = op.solve_checked(rhs, tol, &g.residual, "Green's function solve");
    g.centre = g.field(N / 2, N / 2);
    return g;
}

/// B_ij = (pi^2/2) C0 h^2 ln N (1/4 - (x_i - 1/2)^2); -(dxx+dyy) B = pi^2 C0 h^2 ln N.
inline GridFn2D barrier_field(int N, double c0) {
    require_even_grid(N);
    const double h = 1.0 / N;
    const double amp = 0.5 * kPi2 * c0 * h * h * std::log(static_cast<double>(N));
    GridFn2D b(N);
    for (int j = 0; j <= N; ++j)
        for (int i = 0; i <= N; ++i) {
            const double x = static_cast<double>(2 * i - N) / (2.0 * N);  // x_i - 1/2, exact at i = 0, N
            b(i, j) = amp * (0.25 - x * x);
        }
    return b;
}

/// -(dxx+dyy) applied at interior nodes (boundary rows left 0).
inline GridFn2D apply_laplacian_2d(const GridFn2D& u) { return apply_shifted_laplacian_2d(u, 0.0, 1.0); }

}  // namespace logfem
