#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "logfem/lattice.hpp"

namespace logfem {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Symmetric positive-definite sparse system in CSR form, with its right-hand side.
/// Rows keep columns sorted; explicit zeros are allowed but never produced by the
/// builders in this library.
class SparseSpd {
public:
    SparseSpd() = default;

    /// Build from triplets. Duplicates are summed in input order, so the
    /// result is reproducible for a fixed triplet sequence.
    static SparseSpd from_triplets(int dimension, std::vector<Triplet> triplets, bool drop_zeros = true) {
        std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        SparseSpd m;
        m.dim_ = dimension;
        m.row_ptr_.assign(static_cast<std::size_t>(dimension) + 1, 0);
        for (std::size_t a = 0; a < triplets.size();) {
            std::size_t b = a;
            double sum = 0.0;
            while (b < triplets.size() && triplets[b].row == triplets[a].row && triplets[b].col == triplets[a].col)
                sum += triplets[b++].value;
            const int r = triplets[a].row, c = triplets[a].col;
            if (r < 0 || r >= dimension || c < 0 || c >= dimension)
                throw std::out_of_range("SparseSpd: triplet index outside dimension");
            if (sum != 0.0 || !drop_zeros) {
                m.cols_.push_back(c);
                m.vals_.push_back(sum);
                ++m.row_ptr_[r + 1];
            }
            a = b;
        }
        for (int r = 0; r < dimension; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        m.rhs_.assign(static_cast<std::size_t>(dimension), 0.0);
        m.symmetric_ = m.is_structurally_symmetric();
        return m;
    }

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] std::size_t nonzeros() const { return vals_.size(); }
    [[nodiscard]] bool symmetric() const { return symmetric_; }

    [[nodiscard]] std::span<const int> row_cols(int r) const {
        return {cols_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }
    [[nodiscard]] std::span<const double> row_values(int r) const {
        return {vals_.data() + row_ptr_[r], static_cast<std::size_t>(row_ptr_[r + 1] - row_ptr_[r])};
    }

    [[nodiscard]] double coeff(int r, int c) const {
        const auto cols = row_cols(r);
        const auto it = std::lower_bound(cols.begin(), cols.end(), c);
        if (it == cols.end() || *it != c) return 0.0;
        return vals_[row_ptr_[r] + (it - cols.begin())];
    }

    [[nodiscard]] std::vector<double> diagonal() const {
        std::vector<double> d(static_cast<std::size_t>(dim_));
        for (int r = 0; r < dim_; ++r) d[r] = coeff(r, r);
        return d;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int r = 0; r < dim_; ++r) {
            double s = 0.0;
            for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += vals_[p] * x[cols_[p]];
            y[r] = s;
        }
    }
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(static_cast<std::size_t>(dim_));
        multiply(x, y);
        return y;
    }

    [[nodiscard]] const std::vector<double>& rhs() const { return rhs_; }
    std::vector<double>& rhs() { return rhs_; }
    void set_rhs(std::vector<double> b) {
        if (static_cast<int>(b.size()) != dim_) throw std::invalid_argument("SparseSpd: rhs size mismatch");
        rhs_ = std::move(b);
    }

    /// Largest |a_rc - a_cr| relative to the largest entry magnitude.
    [[nodiscard]] double asymmetry() const {
        double worst = 0.0, scale = 0.0;
        for (int r = 0; r < dim_; ++r) {
            const auto cols = row_cols(r);
            const auto vals = row_values(r);
            for (std::size_t p = 0; p < cols.size(); ++p) {
                scale = std::max(scale, std::abs(vals[p]));
                worst = std::max(worst, std::abs(vals[p] - coeff(cols[p], r)));
            }
        }
        return scale > 0.0 ? worst / scale : 0.0;
    }

private:
    [[nodiscard]] bool is_structurally_symmetric() const {
        for (int r = 0; r < dim_; ++r)
            for (int c : row_cols(r)) {
                const auto cc = row_cols(c);
                if (!std::binary_search(cc.begin(), cc.end(), r)) return false;
            }
        return true;
    }

    int dim_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> vals_;
    std::vector<double> rhs_;
    bool symmetric_ = true;
};

/// Sign pattern and diagonal dominance of an interior-node system on the
/// (N-1)^3 lattice. Rows of nodes adjacent to the boundary must be strictly
/// dominant, all others at least weakly.
struct MMatrixReport {
    std::vector<std::string> failures;
    [[nodiscard]] bool pass() const { return failures.empty(); }
};

inline MMatrixReport check_m_matrix(const SparseSpd& a, int N) {
    MMatrixReport rep;
    const NodeIndexer ix(N);
    if (a.dimension() != ix.interior_count()) {
        rep.failures.push_back("dimension does not match (N-1)^3");
        return rep;
    }
    for (int r = 0; r < a.dimension(); ++r) {
        const auto cols = a.row_cols(r);
        const auto vals = a.row_values(r);
        double diag = 0.0, off = 0.0;
        for (std::size_t p = 0; p < cols.size(); ++p) {
            if (cols[p] == r) {
                diag = vals[p];
            } else {
                if (vals[p] > 0.0) rep.failures.push_back("positive off-diagonal in row " + std::to_string(r));
                off += std::abs(vals[p]);
            }
        }
        if (diag <= 0.0) rep.failures.push_back("non-positive diagonal in row " + std::to_string(r));
        const Node3 p = ix.interior_node(r);
        const bool near_boundary = p.i == 1 || p.j == 1 || p.k == 1 || p.i == N - 1 || p.j == N - 1 || p.k == N - 1;
        const double slack = 1e-13 * diag;
        if (near_boundary ? !(diag - off > slack) : (diag - off < -slack))
            rep.failures.push_back(std::string(near_boundary ? "strict" : "weak") + " dominance fails in row " +
                                   std::to_string(r));
        if (rep.failures.size() > 16) break;
    }
    return rep;
}

/// Coordinate-format export: a header line, then one "row col value" line per
/// stored entry (0-based), values with 17 significant digits.
inline void write_coordinate(std::ostream& os, const SparseSpd& a) {
    os << "% logfem coordinate " << a.dimension() << ' ' << a.dimension() << ' ' << a.nonzeros() << '\n';
    os << std::setprecision(17);
    for (int r = 0; r < a.dimension(); ++r) {
        const auto cols = a.row_cols(r);
        const auto vals = a.row_values(r);
        for (std::size_t p = 0; p < cols.size(); ++p) os << r << ' ' << cols[p] << ' ' << vals[p] << '\n';
    }
}

inline void write_vector(std::ostream& os, std::span<const double> v) {
    os << "% logfem vector " << v.size() << '\n' << std::setprecision(17);
    for (double x : v) os << x << '\n';
}

// Small dense helpers shared by the solvers and studies.

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace logfem
