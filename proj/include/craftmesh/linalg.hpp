#pragma once

#include <functional>
#include <span>
#include <vector>

namespace craftmesh::linalg {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Square matrix in compressed-row form with sorted, duplicate-free columns.
class SparseMatrix {
public:
    SparseMatrix() = default;
    /// Duplicate (row, col) entries are summed; zero sums are kept as explicit
    /// entries so the sparsity pattern is stable.
    static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets);

    int size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }
    double entry(int row, int col) const;
    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> diagonal() const;
    bool is_symmetric(double tol) const;
    std::vector<Triplet> triplets() const;

    const std::vector<int>& row_offsets() const { return row_offsets_; }
    const std::vector<int>& columns() const { return columns_; }
    const std::vector<double>& values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_offsets_{0};
    std::vector<int> columns_;
    std::vector<double> values_;
};

/// Symmetric system A x = b with one right-hand side per channel.
struct SparseSystem {
    SparseMatrix matrix;
    std::vector<std::vector<double>> rhs;

    int size() const { return matrix.size(); }
    /// Symmetry to 1e-12, positive diagonal, rhs sizes and finiteness.
    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double residual = 0.0;  ///< ||Ax-b|| / ||b||
    bool converged = false;
};

struct CgOptions {
    double tolerance = 1e-8;
    int max_iterations = 0;  ///< 0 selects 10 n
    bool jacobi = false;
    /// Called after every iteration with the current iterate and the
    /// recurrence residual, per right-hand side.
    std::function<void(int rhs, int iteration, std::span<const double> x, double residual)>
        observer;
};

struct CgResult {
    std::vector<std::vector<double>> solutions;
    std::vector<SolveReport> reports;  ///< one per right-hand side

    /// Worst case over channels: max iterations and residual, all converged.
    SolveReport summary() const;
};

/// Conjugate gradients from a zero initial guess, one solve per rhs. Returns
/// the best iterate with converged=false when the iteration cap is reached.
/// Throws NumericError on non-finite values or a non-positive curvature.
CgResult cg_solve(const SparseSystem& system, const CgOptions& options = {});

/// Dense LU with partial pivoting; the oracle for cg_solve. Throws
/// ParameterError for n > 5000 and SingularMatrixError naming the pivot.
std::vector<std::vector<double>> dense_solve(const SparseSystem& system);

/// Fixes the unknowns flagged in `fixed` to `values[channel][i]`, moving
/// their columns to the right-hand side and replacing their rows by identity.
/// Keeps the matrix symmetric.
SparseSystem apply_dirichlet(const SparseMatrix& matrix,
                             const std::vector<std::vector<double>>& rhs,
                             const std::vector<char>& fixed,
                             const std::vector<std::vector<double>>& values);

double norm2(std::span<const double> v);

}  // namespace craftmesh::linalg
