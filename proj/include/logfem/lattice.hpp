#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace logfem {

/// Integer lattice point of the uniform grid {0..N}^3 (or {0..N}^2 with k unused).
struct Node3 {
    int i = 0, j = 0, k = 0;
    friend constexpr bool operator==(const Node3&, const Node3&) = default;
    friend constexpr auto operator<=>(const Node3&, const Node3&) = default;
};

struct Node2 {
    int i = 0, j = 0;
    friend constexpr bool operator==(const Node2&, const Node2&) = default;
    friend constexpr auto operator<=>(const Node2&, const Node2&) = default;
};

inline void require_even_grid(int N, int min_n = 2) {
    if (N < min_n || N % 2 != 0)
        throw std::invalid_argument("grid count N must be even and >= " + std::to_string(min_n) +
                                    ", got " + std::to_string(N));
}

/// Exact rational value; only used for the column weight, so no normalization beyond construction.
struct Rational {
    long num = 1;
    long den = 1;
    [[nodiscard]] constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend constexpr bool operator==(const Rational&, const Rational&) = default;
};

/// Column weight: 2/3 on the centre column i = j = N/2, 1 everywhere else.
constexpr Rational gamma(int i, int j, int N) {
    return (i == N / 2 && j == N / 2) ? Rational{2, 3} : Rational{1, 1};
}

/// How the column weight enters a scheme. `Unit` is the gamma == 1 control.
enum class WeightMode { Paper, Unit };

inline double gamma_value(int i, int j, int N, WeightMode mode) {
    return mode == WeightMode::Unit ? 1.0 : gamma(i, j, N).value();
}

/// Eigenvalue of -delta_z^2 for the mode sin(m pi z_k): (4/h^2) sin^2(m pi h / 2).
inline double lambda_h(int m, int N) {
    if (N < 2 || m < 1 || m > N - 1)
        throw std::invalid_argument("lambda_h: mode index must satisfy 1 <= m <= N-1");
    const double n2 = static_cast<double>(N) * N;
    // 4 sin^2(x/2) = 2 (1 - cos x); pick the form without cancellation, exact at m = N/2
    if (2 * m < N) {
        const double s = std::sin(0.5 * std::numbers::pi * m / N);
        return 4.0 * n2 * s * s;
    }
    if (2 * m == N) return 2.0 * n2;
    return 2.0 * n2 * (1.0 + std::cos(std::numbers::pi * (N - m) / N));
}

/// Nodal field on {0..N}^2, boundary included.
class GridFn2D {
public:
    GridFn2D() = default;
    explicit GridFn2D(int N, double fill = 0.0)
        : n_(N), values_(static_cast<std::size_t>(N + 1) * (N + 1), fill) {}

    [[nodiscard]] int N() const { return n_; }
    [[nodiscard]] double h() const { return 1.0 / n_; }
    double& operator()(int i, int j) { return values_[index(i, j)]; }
    double operator()(int i, int j) const { return values_[index(i, j)]; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    [[nodiscard]] std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_ + 1) * j;
    }

    template <class Fn>
    static GridFn2D sample(int N, Fn&& fn) {
        GridFn2D g(N);
        const double h = 1.0 / N;
        for (int j = 0; j <= N; ++j)
            for (int i = 0; i <= N; ++i) g(i, j) = fn(i * h, j * h);
        return g;
    }

private:
    int n_ = 0;
    std::vector<double> values_;
};

/// Nodal field on {0..N}^3, boundary included.
class GridFn3D {
public:
    GridFn3D() = default;
    explicit GridFn3D(int N, double fill = 0.0)
        : n_(N), values_(static_cast<std::size_t>(N + 1) * (N + 1) * (N + 1), fill) {}

    [[nodiscard]] int N() const { return n_; }
    [[nodiscard]] double h() const { return 1.0 / n_; }
    double& operator()(int i, int j, int k) { return values_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return values_[index(i, j, k)]; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    [[nodiscard]] std::size_t index(int i, int j, int k) const {
        const auto s = static_cast<std::size_t>(n_ + 1);
        return static_cast<std::size_t>(i) + s * (static_cast<std::size_t>(j) + s * k);
    }

    template <class Fn>
    static GridFn3D sample(int N, Fn&& fn) {
        GridFn3D g(N);
        const double h = 1.0 / N;
        for (int k = 0; k <= N; ++k)
            for (int j = 0; j <= N; ++j)
                for (int i = 0; i <= N; ++i) g(i, j, k) = fn(i * h, j * h, k * h);
        return g;
    }

private:
    int n_ = 0;
    std::vector<double> values_;
};

/// Bijection between lattice nodes (i,j,k) in {0..N}^3 and linear indices, plus the
/// interior-only numbering used by the assembled systems (i fastest).
class NodeIndexer {
public:
    NodeIndexer() = default;
    explicit NodeIndexer(int N) : n_(N) {}

    [[nodiscard]] int N() const { return n_; }
    [[nodiscard]] int node_count() const { return (n_ + 1) * (n_ + 1) * (n_ + 1); }
    [[nodiscard]] int interior_count() const { return (n_ - 1) * (n_ - 1) * (n_ - 1); }

    [[nodiscard]] int index(const Node3& p) const { return p.i + (n_ + 1) * (p.j + (n_ + 1) * p.k); }
    [[nodiscard]] Node3 node(int idx) const {
        const int s = n_ + 1;
        return {idx % s, (idx / s) % s, idx / (s * s)};
    }
    [[nodiscard]] bool on_boundary(const Node3& p) const {
        return p.i == 0 || p.j == 0 || p.k == 0 || p.i == n_ || p.j == n_ || p.k == n_;
    }
    [[nodiscard]] bool on_boundary(int idx) const { return on_boundary(node(idx)); }

    /// Interior number of an interior node, -1 for boundary nodes.
    [[nodiscard]] int interior_index(const Node3& p) const {
        if (on_boundary(p)) return -1;
        const int m = n_ - 1;
        return (p.i - 1) + m * ((p.j - 1) + m * (p.k - 1));
    }
    [[nodiscard]] Node3 interior_node(int r) const {
        const int m = n_ - 1;
        return {r % m + 1, (r / m) % m + 1, r / (m * m) + 1};
    }

private:
    int n_ = 0;
};

/// Gather interior values of a 3D field in interior numbering.
inline std::vector<double> interior_values(const GridFn3D& u) {
    const NodeIndexer ix(u.N());
    std::vector<double> out(static_cast<std::size_t>(ix.interior_count()));
    for (int r = 0; r < ix.interior_count(); ++r) {
        const Node3 p = ix.interior_node(r);
        out[r] = u(p.i, p.j, p.k);
    }
    return out;
}

/// Scatter an interior vector into a 3D field with zero boundary.
inline GridFn3D from_interior(int N, const std::vector<double>& x) {
    const NodeIndexer ix(N);
    if (static_cast<int>(x.size()) != ix.interior_count())
        throw std::invalid_argument("from_interior: vector length does not match (N-1)^3");
    GridFn3D u(N);
    for (int r = 0; r < ix.interior_count(); ++r) {
        const Node3 p = ix.interior_node(r);
        u(p.i, p.j, p.k) = x[r];
    }
    return u;
}

}  // namespace logfem
