#include "craftmesh/errors.hpp"
#include "craftmesh/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace craftmesh::linalg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double true_residual(const SparseMatrix& a, std::span<const double> x, std::span<const double> b,
                     std::vector<double>& scratch) {
    a.multiply(x, scratch);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = scratch[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

SolveReport solve_one(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                      const std::vector<double>& inv_diag, const CgOptions& options, int channel) {
    const std::size_t n = b.size();
    std::fill(x.begin(), x.end(), 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return {0, 0.0, true};

    const int max_iter = options.max_iterations > 0 ? options.max_iterations
                                                    : std::max(1, 10 * static_cast<int>(n));
    const bool precondition = !inv_diag.empty();
    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n);
    std::vector<double> p(n);
    std::vector<double> ap(n);
    std::vector<double> best(x.begin(), x.end());
    double best_residual = 1.0;

    auto apply_preconditioner = [&]() {
        if (precondition) {
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        } else {
            z = r;
        }
    };
    apply_preconditioner();
    p = z;
    double rz = dot(r, z);

    SolveReport report;
    for (int it = 1; it <= max_iter; ++it) {
        a.multiply(p, ap);
        const double curvature = dot(p, ap);
        if (!std::isfinite(curvature)) throw NumericError("non-finite value in conjugate gradients");
        if (curvature <= 0.0) {
            throw NumericError("matrix is not positive definite (p'Ap <= 0 at iteration " +
                               std::to_string(it) + ")");
        }
        const double alpha = rz / curvature;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        double residual = norm2(r) / bnorm;
        if (!std::isfinite(residual)) throw NumericError("non-finite residual in conjugate gradients");
        if (options.observer) options.observer(channel, it, x, residual);
        report.iterations = it;

        if (residual <= options.tolerance) {
            // Guard against recurrence drift: accept only if the true residual agrees.
            const double actual = true_residual(a, x, b, ap) / bnorm;
            if (actual <= options.tolerance) return {it, actual, true};
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
            residual = actual;
        }
        if (residual < best_residual) {
            best_residual = residual;
            std::copy(x.begin(), x.end(), best.begin());
        }
        apply_preconditioner();
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    std::copy(best.begin(), best.end(), x.begin());
    report.residual = true_residual(a, x, b, ap) / bnorm;
    report.converged = report.residual <= options.tolerance;
    return report;
}

}  // namespace

SolveReport CgResult::summary() const {
    SolveReport s{0, 0.0, true};
    for (const SolveReport& r : reports) {
        s.iterations = std::max(s.iterations, r.iterations);
        s.residual = std::max(s.residual, r.residual);
        s.converged = s.converged && r.converged;
    }
    return s;
}

CgResult cg_solve(const SparseSystem& system, const CgOptions& options) {
    const int n = system.size();
    for (const auto& b : system.rhs) {
        if (b.size() != static_cast<std::size_t>(n)) {
            throw ParameterError("right-hand side length does not match matrix size");
        }
        for (double v : b) {
            if (!std::isfinite(v)) throw NumericError("right-hand side is not finite");
        }
    }
    std::vector<double> inv_diag;
    if (options.jacobi) {
        inv_diag = system.matrix.diagonal();
        for (double& d : inv_diag) {
            if (!(d > 0.0)) throw NumericError("Jacobi preconditioner needs a positive diagonal");
            d = 1.0 / d;
        }
    }
    CgResult result;
    result.solutions.assign(system.rhs.size(), std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < system.rhs.size(); ++c) {
        result.reports.push_back(solve_one(system.matrix, system.rhs[c], result.solutions[c],
                                           inv_diag, options, static_cast<int>(c)));
    }
    return result;
}

}  // namespace craftmesh::linalg
