#include "craftmesh/errors.hpp"
#include "craftmesh/linalg.hpp"

#include <cmath>
#include <limits>

namespace craftmesh::linalg {

std::vector<std::vector<double>> dense_solve(const SparseSystem& system) {
    const int n = system.size();
    if (n > 5000) {
        throw ParameterError("dense_solve refuses n = " + std::to_string(n) + " (> 5000)");
    }
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> a(un * un, 0.0);
    for (const Triplet& t : system.matrix.triplets()) a[t.row * un + t.col] += t.value;
    const std::size_t m = system.rhs.size();
    std::vector<double> b(un * m);
    for (std::size_t c = 0; c < m; ++c) {
        if (system.rhs[c].size() != un) throw ParameterError("right-hand side length mismatch");
        for (std::size_t i = 0; i < un; ++i) b[i * m + c] = system.rhs[c][i];
    }

    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double threshold = scale * static_cast<double>(std::max(n, 1)) *
                             std::numeric_limits<double>::epsilon();

    for (std::size_t k = 0; k < un; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < un; ++i) {
            if (std::abs(a[i * un + k]) > std::abs(a[pivot * un + k])) pivot = i;
        }
        if (!(std::abs(a[pivot * un + k]) > threshold)) throw SingularMatrixError(k);
        if (pivot != k) {
            for (std::size_t j = 0; j < un; ++j) std::swap(a[k * un + j], a[pivot * un + j]);
            for (std::size_t c = 0; c < m; ++c) std::swap(b[k * m + c], b[pivot * m + c]);
        }
        const double inv = 1.0 / a[k * un + k];
        for (std::size_t i = k + 1; i < un; ++i) {
            const double f = a[i * un + k] * inv;
            if (f == 0.0) continue;
            for (std::size_t j = k; j < un; ++j) a[i * un + j] -= f * a[k * un + j];
            for (std::size_t c = 0; c < m; ++c) b[i * m + c] -= f * b[k * m + c];
        }
    }

    std::vector<std::vector<double>> x(m, std::vector<double>(un));
    for (std::size_t c = 0; c < m; ++c) {
        for (std::size_t ii = un; ii-- > 0;) {
            double s = b[ii * m + c];
            for (std::size_t j = ii + 1; j < un; ++j) s -= a[ii * un + j] * x[c][j];
            x[c][ii] = s / a[ii * un + ii];
        }
    }
    return x;
}

}  // namespace craftmesh::linalg
