#include "craftmesh/errors.hpp"
#include "craftmesh/linalg.hpp"
#include "craftmesh/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace craftmesh;
using namespace craftmesh::linalg;

namespace {

SparseSystem from_dense(const std::vector<std::vector<double>>& a,
                        std::vector<std::vector<double>> rhs) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (a[i][j] != 0.0) t.push_back({int(i), int(j), a[i][j]});
        }
    }
    return {SparseMatrix::from_triplets(int(a.size()), t), std::move(rhs)};
}

// Random sparse symmetric diagonally dominant matrix with positive diagonal.
SparseSystem random_spd(int n, std::uint64_t seed, int channels = 1, double density = 0.1) {
    Rng rng(seed);
    std::vector<Triplet> t;
    std::vector<double> row_abs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() < density) {
                const double v = rng.uniform(-1, 1);
                t.push_back({i, j, v});
                t.push_back({j, i, v});
                row_abs[i] += std::abs(v);
                row_abs[j] += std::abs(v);
            }
        }
    }
    for (int i = 0; i < n; ++i) t.push_back({i, i, row_abs[i] + rng.uniform(0.1, 1.0)});
    SparseSystem s{SparseMatrix::from_triplets(n, t), {}};
    for (int c = 0; c < channels; ++c) {
        std::vector<double> b(n);
        for (double& v : b) v = rng.uniform(-1, 1);
        s.rhs.push_back(b);
    }
    return s;
}

double relative_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("cg solves the identity in one iteration") {
    const SparseSystem s = from_dense({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, {{1, 2, 3}});
    const CgResult r = cg_solve(s);
    CHECK(r.reports[0].iterations == 1);
    CHECK(r.reports[0].converged);
    CHECK(r.solutions[0] == std::vector<double>{1, 2, 3});
}

TEST_CASE("cg solves a hand-checkable 2x2 system") {
    const CgResult r = cg_solve(from_dense({{2, 1}, {1, 2}}, {{3, 3}}));
    CHECK(r.solutions[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.solutions[0][1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cg matches the dense oracle on a seeded 50x50 SPD system") {
    const SparseSystem s = random_spd(50, 2024, 2, 0.3);
    s.validate();
    const CgResult cg = cg_solve(s);
    const auto dense = dense_solve(s);
    for (int c = 0; c < 2; ++c) {
        CHECK(cg.reports[c].converged);
        CHECK(cg.reports[c].residual <= 1e-8);
        CHECK(relative_diff(cg.solutions[c], dense[c]) <= 1e-8);
    }
}

TEST_CASE("cg and dense agree across random SPD systems up to n=200") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const int n = 10 + static_cast<int>(seed * 15);
        const SparseSystem s = random_spd(n, seed, 1, 0.05);
        CgOptions opt;
        opt.tolerance = 1e-12;
        const CgResult cg = cg_solve(s, opt);
        CHECK(relative_diff(cg.solutions[0], dense_solve(s)[0]) <= 1e-8);
    }
}

TEST_CASE("cg error energy decreases monotonically") {
    // The A-norm of the error is the quantity CG minimises over the Krylov
    // space, so it never increases; the 2-norm residual may.
    const SparseSystem s = random_spd(80, 77, 1, 0.1);
    const auto exact = dense_solve(s)[0];
    std::vector<double> energies;
    CgOptions opt;
    opt.tolerance = 1e-13;
    opt.observer = [&](int, int, std::span<const double> x, double) {
        std::vector<double> e(x.begin(), x.end());
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= exact[i];
        const auto ae = s.matrix.multiply(e);
        energies.push_back(std::inner_product(e.begin(), e.end(), ae.begin(), 0.0));
    };
    cg_solve(s, opt);
    REQUIRE(energies.size() > 3);
    for (std::size_t i = 1; i < energies.size(); ++i) {
        CHECK(energies[i] <= energies[i - 1] * (1.0 + 1e-9) + 1e-28);
    }
}

TEST_CASE("permuting the unknowns does not change the solution") {
    const SparseSystem s = random_spd(60, 5, 1, 0.1);
    std::vector<int> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(8);
    for (int i = 59; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<Triplet> t;
    for (const Triplet& e : s.matrix.triplets()) t.push_back({perm[e.row], perm[e.col], e.value});
    SparseSystem p{SparseMatrix::from_triplets(60, t), {std::vector<double>(60)}};
    for (int i = 0; i < 60; ++i) p.rhs[0][perm[i]] = s.rhs[0][i];
    CgOptions opt;
    opt.tolerance = 1e-14;
    const auto x = cg_solve(s, opt).solutions[0];
    const auto y = cg_solve(p, opt).solutions[0];
    for (int i = 0; i < 60; ++i) CHECK(std::abs(x[i] - y[perm[i]]) <= 1e-10);
}

TEST_CASE("cg reports non-convergence and numeric failures") {
    const SparseSystem s = random_spd(100, 9, 1, 0.2);
    CgOptions opt;
    opt.max_iterations = 2;
    const CgResult r = cg_solve(s, opt);
    CHECK_FALSE(r.reports[0].converged);
    CHECK(r.reports[0].iterations == 2);
    CHECK(r.reports[0].residual > opt.tolerance);

    SparseSystem bad = from_dense({{1, 0}, {0, 1}}, {{1, std::nan("")}});
    CHECK_THROWS_AS(cg_solve(bad), NumericError);
    CHECK_THROWS_AS(cg_solve(from_dense({{1, 0}, {0, -1}}, {{0, 1}})), NumericError);
}

TEST_CASE("zero right-hand side gives zero solution without iterating") {
    const CgResult r = cg_solve(from_dense({{2, 1}, {1, 2}}, {{0, 0}}));
    CHECK(r.reports[0].converged);
    CHECK(r.reports[0].iterations == 0);
    CHECK(r.solutions[0] == std::vector<double>{0, 0});
}

TEST_CASE("jacobi preconditioning reaches the same solution") {
    const SparseSystem s = random_spd(120, 31, 1, 0.05);
    CgOptions opt;
    opt.jacobi = true;
    opt.tolerance = 1e-12;
    CHECK(relative_diff(cg_solve(s, opt).solutions[0], dense_solve(s)[0]) <= 1e-9);
}

TEST_CASE("dense_solve examples") {
    CHECK(dense_solve(from_dense({{4}}, {{8}}))[0][0] == doctest::Approx(2.0));
    try {
        dense_solve(from_dense({{1, 1}, {1, 1}}, {{1, 1}}));
        FAIL("expected singularity");
    } catch (const SingularMatrixError& e) {
        CHECK(e.pivot() == 1);
    }
    SparseSystem big{SparseMatrix::from_triplets(5001, {}), {}};
    CHECK_THROWS_AS(dense_solve(big), ParameterError);
}

TEST_CASE("path Laplacian with Dirichlet ends interpolates harmonically") {
    // Path 0-1-2-3-4, ends fixed at 0 and 1: interior must be 0.25, 0.5, 0.75.
    std::vector<Triplet> t;
    for (int i = 0; i < 4; ++i) {
        t.push_back({i, i, 1});
        t.push_back({i + 1, i + 1, 1});
        t.push_back({i, i + 1, -1});
        t.push_back({i + 1, i, -1});
    }
    const SparseMatrix lap = SparseMatrix::from_triplets(5, t);
    const std::vector<char> fixed{1, 0, 0, 0, 1};
    const SparseSystem s =
        apply_dirichlet(lap, {std::vector<double>(5, 0.0)}, fixed, {{0.0, 0, 0, 0, 1.0}});
    s.validate();
    CHECK(s.matrix.is_symmetric(0.0));
    const auto x = dense_solve(s)[0];
    CHECK(x[1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(x[3] == doctest::Approx(0.75).epsilon(1e-14));
    const auto y = cg_solve(s).solutions[0];
    for (int i = 0; i < 5; ++i) CHECK(std::abs(x[i] - y[i]) < 1e-8);
}

TEST_CASE("sparse matrix assembly sums duplicates and checks ranges") {
    const SparseMatrix m = SparseMatrix::from_triplets(2, {{0, 0, 1}, {0, 0, 2}, {1, 0, 4}, {0, 1, 4}});
    CHECK(m.entry(0, 0) == 3.0);
    CHECK(m.entry(1, 1) == 0.0);
    CHECK(m.nonzeros() == 3);
    CHECK(m.is_symmetric(0.0));
    CHECK_THROWS_AS(SparseMatrix::from_triplets(2, {{2, 0, 1}}), ParameterError);
    SparseSystem s{SparseMatrix::from_triplets(2, {{0, 0, 1}, {0, 1, 1}}), {}};
    CHECK_THROWS_AS(s.validate(), ParameterError);
}
