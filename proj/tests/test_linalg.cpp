#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "igamag/assembly.hpp"
#include "igamag/demo_machine.hpp"
#include "igamag/linalg.hpp"

using namespace igamag::linalg;

TEST_CASE("spmv: identity and hand arithmetic") {
    const SparseMatrix I = SparseMatrix::from_triplets(3, 3, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}});
    const std::vector<double> x{3, -1, 7};
    CHECK(I.spmv(x) == x);

    const SparseMatrix A =
        SparseMatrix::from_triplets(2, 2, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 2}});
    const auto y = A.spmv({1, 1});
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(3.0));

    CHECK_THROWS_AS(A.spmv({1, 2, 3}), std::invalid_argument);
}

TEST_CASE("from_triplets sums duplicates and sorts columns") {
    const SparseMatrix A = SparseMatrix::from_triplets(
        2, 2, {{0, 1, 2.0}, {0, 0, 1.0}, {0, 1, 3.0}, {1, 1, 4.0}});
    CHECK(A.row_ptr() == std::vector<int>{0, 2, 3});
    CHECK(A.col_idx() == std::vector<int>{0, 1, 1});
    CHECK(A.values() == std::vector<double>{1.0, 5.0, 4.0});
}

TEST_CASE("spmv against a dense oracle on a random SPD matrix") {
    const int n = 50;
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dv(-1.0, 1.0);
    std::vector<double> dense(n * n, 0.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            if (j < i && dv(rng) > -0.5) continue;  // keep it sparse
            const double v = j == i ? 6.0 + dv(rng) : dv(rng);
            dense[i * n + j] = dense[j * n + i] = v;
            trips.push_back({i, j, v});
            if (j != i) trips.push_back({j, i, v});
        }
    const SparseMatrix A = SparseMatrix::from_triplets(n, n, std::move(trips));
    std::vector<double> x(n);
    for (auto& v : x) v = dv(rng);
    const auto y = A.spmv(x);
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int j = 0; j < n; ++j) acc += dense[i * n + j] * x[j];
        CHECK(std::abs(y[i] - acc) < 1e-13);
    }

    SUBCASE("solve_spd honours the residual contract") {
        std::vector<double> b(n);
        for (auto& v : b) v = dv(rng);
        std::vector<double> sol;
        const auto rep = solve_spd(A, b, sol, 1e-12, 10 * n);
        REQUIRE(rep.converged);
        const auto r = A.spmv(sol);
        double num = 0, den = 0;
        for (int i = 0; i < n; ++i) {
            num += (b[i] - r[i]) * (b[i] - r[i]);
            den += b[i] * b[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-12);
    }
}

TEST_CASE("solve_spd trivial cases") {
    const SparseMatrix I = SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {1, 1, 1}});
    std::vector<double> x;
    const auto rep = solve_spd(I, {5, -3}, x);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
    CHECK(x[0] == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(x[1] == doctest::Approx(-3.0).epsilon(1e-13));

    const SparseMatrix A =
        SparseMatrix::from_triplets(2, 2, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 2}});
    std::vector<double> y;
    CHECK(solve_spd(A, {3, 3}, y, 1e-13).converged);
    CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_spd rejects non-positive diagonals and reports non-convergence") {
    const SparseMatrix Z = SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 0, 1}});
    std::vector<double> x;
    CHECK_THROWS_AS(solve_spd(Z, {1, 1}, x), std::invalid_argument);

    // ill-conditioned system with a hopeless iteration budget
    std::vector<Triplet> trips;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, 2.0});
        if (i + 1 < n) {
            trips.push_back({i, i + 1, -1.0});
            trips.push_back({i + 1, i, -1.0});
        }
    }
    const SparseMatrix A = SparseMatrix::from_triplets(n, n, std::move(trips));
    std::vector<double> b(n, 1.0), sol;
    const auto rep = solve_spd(A, b, sol, 1e-14, 3);
    CHECK_FALSE(rep.converged);
    CHECK(rep.rel_residual > 1e-14);
    CHECK(sol.size() == static_cast<size_t>(n));  // best iterate is still returned
}

TEST_CASE("solve_spd is bitwise deterministic") {
    const int n = 80;
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dv(-1.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, 5.0 + dv(rng)});
        if (i + 1 < n) {
            const double v = dv(rng);
            trips.push_back({i, i + 1, v});
            trips.push_back({i + 1, i, v});
        }
    }
    const SparseMatrix A = SparseMatrix::from_triplets(n, n, std::move(trips));
    std::vector<double> b(n);
    for (auto& v : b) v = dv(rng);
    std::vector<double> x1, x2;
    solve_spd(A, b, x1, 1e-13);
    solve_spd(A, b, x2, 1e-13);
    CHECK(x1 == x2);
}

TEST_CASE("bundled stator system meets the residual contract at 1e-12") {
    using namespace igamag;
    const auto model =
        std::make_shared<const geom::MultiPatchModel>(geom::make_demo_machine());
    const auto disc = assembly::discretize(model, geom::Subdomain::Stator, 2, 1);
    const auto dm = assembly::build_dof_map(*disc);
    const auto quad = assembly::make_quadrature(*disc);
    const auto sys = assembly::assemble_system(*disc, dm, quad);
    const auto rhs = assembly::constrained_rhs(sys, dm);

    std::vector<double> x;
    const auto rep = solve_spd(sys.K, rhs, x, 1e-12, 40 * dm.free_count);
    REQUIRE(rep.converged);
    // verify with an independent matrix-vector product, not the CG recurrence
    const auto Ax = sys.K.spmv(x);
    double num = 0, den = 0;
    for (int i = 0; i < dm.free_count; ++i) {
        num += (rhs[i] - Ax[i]) * (rhs[i] - Ax[i]);
        den += rhs[i] * rhs[i];
    }
    CHECK(std::sqrt(num) <= 1e-12 * std::sqrt(den));
}
