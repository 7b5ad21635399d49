#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sinkdist/emd.hpp"
#include "sinkdist/errors.hpp"
#include "test_support.hpp"

using namespace sinkdist;

namespace {

CostMatrix line_metric(Eigen::Index d) {
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = static_cast<double>(std::abs(i - j));
  }
  return CostMatrix(m);
}

// Reduced costs nonnegative everywhere and zero on the plan's support.
void check_certificate(const EmdSolution& s, const CostMatrix& m) {
  const Eigen::Index d = m.size();
  const double scale = std::max(1.0, m.entries().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double reduced = m(i, j) - s.row_potential[i] - s.col_potential[j];
      CHECK(reduced >= -1e-9 * scale);
      if (s.plan.entries()(i, j) > 1e-14) CHECK(std::abs(reduced) <= 1e-9 * scale);
    }
  }
}

}  // namespace

TEST_SUITE("exact_emd") {
  TEST_CASE("equal histograms cost nothing") {
    const Histogram r = sample_simplex(12, 4);
    const EmdSolution s = solve_emd(r, r, random_points_metric(12, 4));
    CHECK(std::abs(s.cost) <= 1e-14);
    CHECK((s.plan.entries() - Matrix(r.weights().asDiagonal())).cwiseAbs().maxCoeff() <= 1e-14);
  }

  TEST_CASE("forced transport") {
    const EmdSolution s =
        solve_emd(Histogram(Vector{{1, 0}}), Histogram(Vector{{0, 1}}), CostMatrix(Matrix{{0, 1}, {1, 0}}));
    CHECK(s.cost == 1.0);
    CHECK(s.plan.entries() == Matrix{{0, 1}, {0, 0}});
  }

  TEST_CASE("dimension mismatch") {
    CHECK_THROWS_AS(solve_emd(sample_simplex(3, 1), sample_simplex(4, 1), random_points_metric(3, 1)), DomainError);
    CHECK_THROWS_AS(solve_emd(sample_simplex(3, 1), sample_simplex(3, 1), random_points_metric(4, 1)), DomainError);
  }

  TEST_CASE("matches vertex enumeration for d <= 3") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const Eigen::Index d = 1 + static_cast<Eigen::Index>(s % 3);
      Matrix m(d, d);
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = unif(rng);
      const Histogram r = s % 4 == 0 ? testsupport::sparse_histogram(d, s) : sample_simplex(d, s);
      const Histogram c = sample_simplex(d, s + 500);
      const CostMatrix cm(m);
      const EmdSolution sol = solve_emd(r, c, cm);
      CHECK(std::abs(sol.cost - oracle::brute_force_emd(r.weights(), c.weights(), m)) <= 1e-10);
      CHECK(sol.plan.has_marginals(r.weights(), c.weights(), 1e-12));
      CHECK(std::abs(sol.plan.cost(m) - sol.cost) <= 1e-12);
      check_certificate(sol, cm);
    }
  }

  TEST_CASE("line metric matches the cumulative sum formula") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      const Eigen::Index d = 2 + static_cast<Eigen::Index>(s % 63);
      const Histogram r = s % 5 == 0 ? testsupport::sparse_histogram(d, s) : sample_simplex(d, s);
      const Histogram c = sample_simplex(d, s + 7777);
      const CostMatrix m = line_metric(d);
      const EmdSolution sol = solve_emd(r, c, m);
      CHECK(std::abs(sol.cost - oracle::line_emd(r.weights(), c.weights())) <= 1e-8);
      CHECK(sol.basic_support_size <= 2 * d - 1);
      const Eigen::Index nnz = (sol.plan.entries().array() > 0.0).count();
      CHECK(nnz <= 2 * d - 1);
    }
  }

  TEST_CASE("d=16 line metric example") {
    const Histogram r = sample_simplex(16, 1), c = sample_simplex(16, 2);
    CHECK(solve_emd(r, c, line_metric(16)).cost ==
          doctest::Approx(oracle::line_emd(r.weights(), c.weights())).epsilon(1e-12));
  }

  TEST_CASE("dual certificate on larger random metrics") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::Index d = 40 + static_cast<Eigen::Index>(s) * 10;
      const CostMatrix m = random_points_metric(d, s);
      const Histogram r = testsupport::sparse_histogram(d, s), c = sample_simplex(d, s + 1);
      const EmdSolution sol = solve_emd(r, c, m);
      check_certificate(sol, m);
      CHECK(sol.plan.has_marginals(r.weights(), c.weights(), 1e-12));
      CHECK((sol.plan.entries().array() > 0.0).count() <= 2 * d - 1);
      CHECK(std::abs(sol.cost - (r.weights().dot(sol.row_potential) + c.weights().dot(sol.col_potential))) <= 1e-10);
    }
  }

  TEST_CASE("pivot cap raises a solver error") {
    EmdOptions tiny;
    tiny.max_pivots = 1;
    tiny.pivot_budget = 1;
    const Eigen::Index d = 30;
    CHECK_THROWS_AS(solve_emd(sample_simplex(d, 1), sample_simplex(d, 2), random_points_metric(d, 3), tiny),
                    SolverError);
  }

  TEST_CASE("Bland fallback reaches the same optimum") {
    EmdOptions bland;
    bland.pivot_budget = 1;
    const Eigen::Index d = 25;
    const Histogram r = sample_simplex(d, 5), c = sample_simplex(d, 6);
    const CostMatrix m = random_points_metric(d, 7);
    const EmdSolution a = solve_emd(r, c, m), b = solve_emd(r, c, m, bland);
    CHECK(b.used_bland);
    CHECK(std::abs(a.cost - b.cost) <= 1e-12);
  }
}
