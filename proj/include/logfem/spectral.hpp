#pragma once

// Discrete sine transform on the interior nodes 1..N-1 and a direct 2D solver
// for -(dxx + dyy) u + sigma * w_ij u = b with w_ij = 1 except at the centre
// node. The constant-shift part is diagonal in the sine basis; the centre
// weight is a rank-one update handled with Sherman-Morrison.

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "logfem/error.hpp"
#include "logfem/lattice.hpp"

namespace logfem {

/// Dense sine matrix S[m][k] = sin(pi m k / N), m, k = 1..N-1 (stored 0-based).
/// S is symmetric and S*S = (N/2) I.
class SineBasis {
public:
    explicit SineBasis(int N) : n_(N), m_(N - 1), s_(static_cast<std::size_t>(m_) * m_) {
        if (N < 2) throw std::invalid_argument("SineBasis: N must be >= 2");
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b) {
                // reduce the argument exactly before evaluating
                const long r = (static_cast<long>(a + 1) * (b + 1)) % (2L * N);
                s_[static_cast<std::size_t>(a) * m_ + b] = std::sin(std::numbers::pi * static_cast<double>(r) / N);
            }
    }

    [[nodiscard]] int N() const { return n_; }
    [[nodiscard]] int size() const { return m_; }
    /// sin(pi m k / N) for 1 <= m, k <= N-1
    [[nodiscard]] double operator()(int m, int k) const { return s_[static_cast<std::size_t>(m - 1) * m_ + (k - 1)]; }

    /// out[m] = sum_k S[m][k] in[k] over strided views of length N-1.
    void apply(const double* in, std::ptrdiff_t in_stride, double* out, std::ptrdiff_t out_stride) const {
        for (int a = 0; a < m_; ++a) {
            const double* row = &s_[static_cast<std::size_t>(a) * m_];
            double acc = 0.0;
            for (int b = 0; b < m_; ++b) acc += row[b] * in[b * in_stride];
            out[a * out_stride] = acc;
        }
    }

    /// max |sum_k S[m][k] S[n][k] - (N/2) delta_mn|
    [[nodiscard]] double orthogonality_defect() const {
        double worst = 0.0;
        for (int a = 1; a <= m_; ++a)
            for (int b = 1; b <= m_; ++b) {
                double s = 0.0;
                for (int k = 1; k <= m_; ++k) s += (*this)(a, k) * (*this)(b, k);
                worst = std::max(worst, std::abs(s - (a == b ? 0.5 * n_ : 0.0)));
            }
        return worst;
    }

private:
    int n_;
    int m_;
    std::vector<double> s_;
};

/// Interior-only (N-1)^2 block, i fastest.
using Interior2D = std::vector<double>;

inline Interior2D interior_of(const GridFn2D& g) {
    const int n = g.N() - 1;
    Interior2D out(static_cast<std::size_t>(n) * n);
    for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) out[(i - 1) + static_cast<std::size_t>(n) * (j - 1)] = g(i, j);
    return out;
}

inline GridFn2D grid_of(int N, const Interior2D& v) {
    const int n = N - 1;
    GridFn2D g(N);
    for (int j = 1; j <= n; ++j)
        for (int i = 1; i <= n; ++i) g(i, j) = v[(i - 1) + static_cast<std::size_t>(n) * (j - 1)];
    return g;
}

/// 2D sine transform of an interior block (both directions), in place via scratch.
inline void sine_transform_2d(const SineBasis& s, Interior2D& v) {
    const int n = s.size();
    Interior2D tmp(v.size());
    for (int j = 0; j < n; ++j) s.apply(&v[static_cast<std::size_t>(n) * j], 1, &tmp[static_cast<std::size_t>(n) * j], 1);
    for (int i = 0; i < n; ++i) s.apply(&tmp[i], n, &v[i], n);
}

/// Apply -(dxx + dyy) + sigma * w_ij on the interior with zero boundary.
inline GridFn2D apply_shifted_laplacian_2d(const GridFn2D& u, double sigma, double centre_weight) {
    const int N = u.N();
    const double ih2 = static_cast<double>(N) * N;
    GridFn2D out(N);
    for (int j = 1; j < N; ++j)
        for (int i = 1; i < N; ++i) {
            const double w = (i == N / 2 && j == N / 2) ? centre_weight : 1.0;
            out(i, j) = ih2 * (4.0 * u(i, j) - u(i - 1, j) - u(i + 1, j) - u(i, j - 1) - u(i, j + 1)) +
                        sigma * w * u(i, j);
        }
    return out;
}

class ShiftedPoisson2D {
public:
    /// `centre_weight` multiplies the shift at node (N/2, N/2) only.
    ShiftedPoisson2D(std::shared_ptr<const SineBasis> basis, double sigma, double centre_weight)
        : basis_(std::move(basis)), sigma_(sigma), centre_weight_(centre_weight) {
        const int N = basis_->N();
        if (N % 2 != 0) throw std::invalid_argument("ShiftedPoisson2D: N must be even");
        const int n = N - 1;
        std::vector<double> lam(static_cast<std::size_t>(n));
        for (int m = 1; m <= n; ++m) lam[m - 1] = lambda_h(m, N);
        inv_eig_.resize(static_cast<std::size_t>(n) * n);
        for (int q = 0; q < n; ++q)
            for (int p = 0; p < n; ++p) {
                const double mu = lam[p] + lam[q] + sigma_;
                if (!(mu > 0.0)) throw std::invalid_argument("ShiftedPoisson2D: operator is not positive definite");
                inv_eig_[p + static_cast<std::size_t>(n) * q] = 1.0 / mu;
            }
        tau_ = sigma_ * (centre_weight_ - 1.0);
        if (tau_ != 0.0) {
            Interior2D e(static_cast<std::size_t>(n) * n, 0.0);
            e[centre()] = 1.0;
            z_ = solve_unperturbed(std::move(e));
            const double denom = 1.0 + tau_ * z_[centre()];
            if (!(denom > 0.0)) throw std::invalid_argument("ShiftedPoisson2D: centre weight breaks definiteness");
            sm_scale_ = tau_ / denom;
        }
    }

    ShiftedPoisson2D(int N, double sigma, double centre_weight)
        : ShiftedPoisson2D(std::make_shared<const SineBasis>(N), sigma, centre_weight) {}

    [[nodiscard]] int N() const { return basis_->N(); }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] double centre_weight() const { return centre_weight_; }

    /// Direct solve on the interior block.
    [[nodiscard]] Interior2D solve(Interior2D b) const {
        Interior2D x = solve_unperturbed(std::move(b));
        if (tau_ != 0.0) {
            const double c = sm_scale_ * x[centre()];
            for (std::size_t a = 0; a < x.size(); ++a) x[a] -= c * z_[a];
        }
        return x;
    }

    /// Solve and verify: returns the field and writes the relative max-norm
    /// residual. Throws SolverError above `tol`.
    GridFn2D solve_checked(const GridFn2D& rhs, double tol, double* residual_out = nullptr,
                           const std::string& label = "2D solve") const {
        GridFn2D u = grid_of(N(), solve(interior_of(rhs)));
        const double res = residual(u, rhs);
        if (residual_out) *residual_out = res;
        if (!(res <= tol)) throw SolverError(label + " did not meet tolerance", res);
        return u;
    }

    /// ||A u - rhs||_inf / ||rhs||_inf over the interior (absolute when rhs = 0).
    [[nodiscard]] double residual(const GridFn2D& u, const GridFn2D& rhs) const {
        const GridFn2D au = apply_shifted_laplacian_2d(u, sigma_, centre_weight_);
        const int n = N();
        double r = 0.0, b = 0.0;
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) {
                r = std::max(r, std::abs(au(i, j) - rhs(i, j)));
                b = std::max(b, std::abs(rhs(i, j)));
            }
        return b > 0.0 ? r / b : r;
    }

private:
    [[nodiscard]] std::size_t centre() const {
        const int n = N() - 1;
        const int c = N() / 2 - 1;
        return static_cast<std::size_t>(c) + static_cast<std::size_t>(n) * c;
    }

    [[nodiscard]] Interior2D solve_unperturbed(Interior2D b) const {
        sine_transform_2d(*basis_, b);
        const double norm = 4.0 / (static_cast<double>(N()) * N());
        for (std::size_t a = 0; a < b.size(); ++a) b[a] *= inv_eig_[a] * norm;
        sine_transform_2d(*basis_, b);
        return b;
    }

    std::shared_ptr<const SineBasis> basis_;
    double sigma_;
    double centre_weight_;
    std::vector<double> inv_eig_;
    double tau_ = 0.0;
    double sm_scale_ = 0.0;
    Interior2D z_;
};

}  // namespace logfem
