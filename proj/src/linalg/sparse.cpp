#include "craftmesh/errors.hpp"
#include "craftmesh/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace craftmesh::linalg {

SparseMatrix SparseMatrix::from_triplets(int n, std::vector<Triplet> triplets) {
    for (const Triplet& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
            throw ParameterError("triplet (" + std::to_string(t.row) + "," +
                                 std::to_string(t.col) + ") outside " + std::to_string(n) + "x" +
                                 std::to_string(n));
        }
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.n_ = n;
    m.row_offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
        const int r = triplets[i].row;
        const int c = triplets[i].col;
        double sum = 0.0;
        for (; i < triplets.size() && triplets[i].row == r && triplets[i].col == c; ++i) {
            sum += triplets[i].value;
        }
        m.columns_.push_back(c);
        m.values_.push_back(sum);
        ++m.row_offsets_[r + 1];
    }
    for (int r = 0; r < n; ++r) m.row_offsets_[r + 1] += m.row_offsets_[r];
    return m;
}

double SparseMatrix::entry(int row, int col) const {
    const auto first = columns_.begin() + row_offsets_[row];
    const auto last = columns_.begin() + row_offsets_[row + 1];
    const auto it = std::lower_bound(first, last, col);
    return (it != last && *it == col) ? values_[it - columns_.begin()] : 0.0;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n_; ++r) {
        double sum = 0.0;
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) sum += values_[k] * x[columns_[k]];
        y[r] = sum;
    }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

std::vector<double> SparseMatrix::diagonal() const {
    std::vector<double> d(n_);
    for (int r = 0; r < n_; ++r) d[r] = entry(r, r);
    return d;
}

bool SparseMatrix::is_symmetric(double tol) const {
    for (int r = 0; r < n_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            if (std::abs(values_[k] - entry(columns_[k], r)) > tol) return false;
        }
    }
    return true;
}

std::vector<Triplet> SparseMatrix::triplets() const {
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (int r = 0; r < n_; ++r) {
        for (int k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
            out.push_back({r, columns_[k], values_[k]});
        }
    }
    return out;
}

void SparseSystem::validate() const {
    if (!matrix.is_symmetric(1e-12)) throw ParameterError("system matrix is not symmetric");
    const std::vector<double> d = matrix.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) {
            throw ParameterError("diagonal entry " + std::to_string(i) + " is not positive");
        }
    }
    for (const auto& b : rhs) {
        if (b.size() != static_cast<std::size_t>(matrix.size())) {
            throw ParameterError("right-hand side length does not match matrix size");
        }
        for (double v : b) {
            if (!std::isfinite(v)) throw NumericError("right-hand side is not finite");
        }
    }
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

SparseSystem apply_dirichlet(const SparseMatrix& matrix,
                             const std::vector<std::vector<double>>& rhs,
                             const std::vector<char>& fixed,
                             const std::vector<std::vector<double>>& values) {
    const int n = matrix.size();
    if (fixed.size() != static_cast<std::size_t>(n) || values.size() != rhs.size()) {
        throw ParameterError("Dirichlet data does not match the system");
    }
    SparseSystem out;
    out.rhs = rhs;
    for (std::size_t c = 0; c < rhs.size(); ++c) {
        if (values[c].size() != static_cast<std::size_t>(n) ||
            rhs[c].size() != static_cast<std::size_t>(n)) {
            throw ParameterError("Dirichlet values do not match the system size");
        }
    }
    std::vector<Triplet> kept;
    kept.reserve(matrix.nonzeros());
    const auto& offsets = matrix.row_offsets();
    const auto& cols = matrix.columns();
    const auto& vals = matrix.values();
    for (int r = 0; r < n; ++r) {
        if (fixed[r]) continue;
        for (int k = offsets[r]; k < offsets[r + 1]; ++k) {
            const int col = cols[k];
            if (fixed[col]) {
                for (std::size_t c = 0; c < rhs.size(); ++c) out.rhs[c][r] -= vals[k] * values[c][col];
            } else {
                kept.push_back({r, col, vals[k]});
            }
        }
    }
    for (int r = 0; r < n; ++r) {
        if (!fixed[r]) continue;
        kept.push_back({r, r, 1.0});
        for (std::size_t c = 0; c < rhs.size(); ++c) out.rhs[c][r] = values[c][r];
    }
    out.matrix = SparseMatrix::from_triplets(n, std::move(kept));
    return out;
}

}  // namespace craftmesh::linalg
