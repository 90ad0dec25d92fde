#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "logfem/error.hpp"
#include "logfem/fd.hpp"
#include "logfem/lattice.hpp"
#include "logfem/parallel.hpp"
#include "logfem/sparse.hpp"
#include "logfem/spectral.hpp"

namespace logfem {

inline constexpr double kCgTol = 1e-10;
inline constexpr double kStudyTol = 1e-11;

struct IterativeSolve {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  ///< ||Ax - b||_2 / ||b||_2
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
inline IterativeSolve solve_cg(const SparseSpd& a, std::span<const double> b, double tol = kCgTol,
                               int max_iter = 10000) {
    const auto n = static_cast<std::size_t>(a.dimension());
    if (b.size() != n) throw std::invalid_argument("solve_cg: rhs size mismatch");
    IterativeSolve out;
    out.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return out;

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (!(d > 0.0)) throw std::invalid_argument("solve_cg: non-positive diagonal");
        d = 1.0 / d;
    }
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    double rel = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        a.multiply(p, q);
        const double alpha = rz / dot(p, q);
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = norm2(r) / bnorm;
        out.iterations = it;
        if (rel <= tol) {
            // report the true residual, not the recurrence
            const auto ax = a.multiply(out.x);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
            out.residual = norm2(r) / bnorm;
            if (out.residual <= tol) return out;
            // the recurrence drifted below roundoff: restart from the true residual
            rel = out.residual;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] = inv_diag[i] * r[i];
            rz = dot(r, z);
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("solve_cg: max_iter " + std::to_string(max_iter) + " exceeded", rel, max_iter);
}

inline IterativeSolve solve_cg(const SparseSpd& a, double tol = kCgTol, int max_iter = 10000) {
    return solve_cg(a, a.rhs(), tol, max_iter);
}

inline constexpr int kDirectDimensionCap = 20000;

/// Banded Cholesky (LL^T) solve; bandwidth taken from the sparsity pattern.
inline std::vector<double> solve_direct_small(const SparseSpd& a, std::span<const double> b,
                                              int cap = kDirectDimensionCap) {
    const int n = a.dimension();
    if (n > cap)
        throw std::invalid_argument("solve_direct_small: dimension " + std::to_string(n) + " exceeds cap " +
                                    std::to_string(cap));
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("solve_direct_small: rhs size mismatch");
    int bw = 0;
    for (int r = 0; r < n; ++r)
        for (int c : a.row_cols(r)) bw = std::max(bw, std::abs(r - c));

    // band[r][d] = L(r, r - d), d = 0..bw
    const auto w = static_cast<std::size_t>(bw) + 1;
    std::vector<double> band(static_cast<std::size_t>(n) * w, 0.0);
    auto at = [&](int r, int d) -> double& { return band[static_cast<std::size_t>(r) * w + d]; };
    for (int r = 0; r < n; ++r) {
        const auto cols = a.row_cols(r);
        const auto vals = a.row_values(r);
        for (std::size_t p = 0; p < cols.size(); ++p)
            if (cols[p] <= r) at(r, r - cols[p]) = vals[p];
    }
    for (int r = 0; r < n; ++r) {
        for (int d = std::min(r, bw); d >= 1; --d) {
            const int c = r - d;
            double s = at(r, d);
            const int kmax = std::min(bw - d, c);
            for (int k = 1; k <= kmax; ++k) s -= at(r, d + k) * at(c, k);
            at(r, d) = s / at(c, 0);
        }
        double s = at(r, 0);
        for (int k = 1; k <= std::min(r, bw); ++k) s -= at(r, k) * at(r, k);
        if (!(s > 0.0)) throw SolverError("solve_direct_small: matrix not positive definite at row " + std::to_string(r), s);
        at(r, 0) = std::sqrt(s);
    }
    std::vector<double> x(b.begin(), b.end());
    for (int r = 0; r < n; ++r) {
        double s = x[r];
        for (int d = 1; d <= std::min(r, bw); ++d) s -= at(r, d) * x[r - d];
        x[r] = s / at(r, 0);
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = x[r];
        for (int d = 1; d <= std::min(n - 1 - r, bw); ++d) s -= at(r + d, d) * x[r + d];
        x[r] = s / at(r, 0);
    }
    return x;
}

inline std::vector<double> solve_direct_small(const SparseSpd& a, int cap = kDirectDimensionCap) {
    return solve_direct_small(a, a.rhs(), cap);
}

// ---------------------------------------------------------------------------
// z-mode decomposition of L^h

/// Sine coefficients in z of an interior field: out[m](i,j) = sum_k sin(pi m z_k) u(i,j,k).
inline std::vector<GridFn2D> sine_modes_z(const GridFn3D& u, const SineBasis& s) {
    const int N = u.N();
    std::vector<GridFn2D> modes(static_cast<std::size_t>(N - 1), GridFn2D(N));
    std::vector<double> col(static_cast<std::size_t>(N - 1)), hat(col.size());
    for (int j = 1; j < N; ++j)
        for (int i = 1; i < N; ++i) {
            for (int k = 1; k < N; ++k) col[k - 1] = u(i, j, k);
            s.apply(col.data(), 1, hat.data(), 1);
            for (int m = 1; m < N; ++m) modes[m - 1](i, j) = hat[m - 1];
        }
    return modes;
}

struct FastSolve {
    GridFn3D u;
    double residual = 0.0;           ///< ||L^h U - g||_inf / ||g||_inf, measured after reconstruction
    double max_mode_residual = 0.0;  ///< worst per-mode 2D residual
};

/// Solve L^h U = g (zero boundary) by expanding g in z-sine modes; each mode
/// m solves -(dxx+dyy) U^m + gamma_ij lambda_h(m) U^m = g^m. Modes are
/// independent and run on up to `threads` workers.
inline FastSolve solve_Lh_fast(const GridFn3D& g, WeightMode mode = WeightMode::Paper, int threads = 1,
                               double tol = kStudyTol) {
    const int N = g.N();
    require_even_grid(N);
    auto basis = std::make_shared<const SineBasis>(N);
    const auto rhs_modes = sine_modes_z(g, *basis);
    const double cw = mode == WeightMode::Unit ? 1.0 : gamma(N / 2, N / 2, N).value();

    std::vector<GridFn2D> sol(static_cast<std::size_t>(N - 1));
    std::vector<double> res(static_cast<std::size_t>(N - 1), 0.0);
    parallel_for(N - 1, threads, [&](int a) {
        const int m = a + 1;
        const ShiftedPoisson2D op(basis, lambda_h(m, N), cw);
        sol[a] = grid_of(N, op.solve(interior_of(rhs_modes[a])));
        res[a] = op.residual(sol[a], rhs_modes[a]);
    });

    FastSolve out;
    out.u = GridFn3D(N);
    std::vector<double> hat(static_cast<std::size_t>(N - 1)), col(hat.size());
    const double scale = 2.0 / N;
    for (int j = 1; j < N; ++j)
        for (int i = 1; i < N; ++i) {
            for (int m = 1; m < N; ++m) hat[m - 1] = sol[m - 1](i, j);
            basis->apply(hat.data(), 1, col.data(), 1);
            for (int k = 1; k < N; ++k) out.u(i, j, k) = scale * col[k - 1];
        }

    const GridFn3D lu = apply_Lh(out.u, mode);
    const double gnorm = norm_inf(g.values());
    const double r = max_abs_diff(lu.values(), g.values());
    out.residual = gnorm > 0.0 ? r / gnorm : r;
    for (double x : res) out.max_mode_residual = std::max(out.max_mode_residual, x);
    if (!(out.residual <= tol)) {
        const auto worst = std::max_element(res.begin(), res.end()) - res.begin();
        throw SolverError("solve_Lh_fast: residual above tolerance (worst mode m=" + std::to_string(worst + 1) + ")",
                          out.residual);
    }
    return out;
}

/// Solve the FD scheme L^h U = gamma f for f sampled at the nodes.
template <class F>
FastSolve solve_sine_fast(int N, F&& f, WeightMode mode = WeightMode::Paper, int threads = 1,
                          double tol = kStudyTol) {
    require_even_grid(N);
    const double h = 1.0 / N;
    GridFn3D g(N);
    for (int k = 1; k < N; ++k)
        for (int j = 1; j < N; ++j)
            for (int i = 1; i < N; ++i) g(i, j, k) = gamma_value(i, j, N, mode) * f(i * h, j * h, k * h);
    return solve_Lh_fast(g, mode, threads, tol);
}

}  // namespace logfem
