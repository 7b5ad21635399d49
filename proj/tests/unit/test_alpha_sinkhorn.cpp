#include <cmath>

#include "doctest.h"
#include "sinkdist/alpha_sinkhorn.hpp"
#include "sinkdist/emd.hpp"
#include "sinkdist/errors.hpp"
#include "sinkdist/kernels.hpp"

using namespace sinkdist;

namespace {
const Histogram kHalf(Vector{{0.5, 0.5}});
}

TEST_SUITE("alpha_sinkhorn") {
  TEST_CASE("entropy target") {
    CHECK(entropy_target(kHalf, kHalf, AlphaBall(0.0)) == doctest::Approx(2 * std::log(2.0)));
    CHECK(std::abs(entropy_target(kHalf, kHalf, AlphaBall(2 * std::log(2.0)))) <= 1e-15);
    CHECK(entropy_target(kHalf, kHalf, AlphaBall(5.0)) < 0.0);
  }

  TEST_CASE("alpha zero gives the independence table") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Histogram r = sample_simplex(8, s), c = sample_simplex(8, s + 50);
      const CostMatrix m = random_points_metric(8, s);
      const AlphaSolveReport rep = sinkhorn_alpha(r, c, m, AlphaBall(0.0));
      CHECK(rep.boundary == AlphaBoundary::kIndependence);
      CHECK(std::abs(rep.value - r.weights().dot(m.entries() * c.weights())) <= 1e-12);
      CHECK((rep.plan.entries() - r.weights() * c.weights().transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }

  TEST_CASE("vacuous constraint recovers the exact cost") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Eigen::Index d = 4 + static_cast<Eigen::Index>(s % 5);
      const Histogram r = sample_simplex(d, s), c = sample_simplex(d, s + 50);
      const CostMatrix m = median_normalize(random_points_metric(d, s));
      const double alpha = entropy(r) + entropy(c);
      const double value = sinkhorn_alpha(r, c, m, AlphaBall(alpha)).value;
      const double emd = solve_emd(r, c, m).cost;
      CHECK(std::abs(value - emd) <= 0.01 * emd);
    }
  }

  TEST_CASE("bisection meets the entropy target") {
    const Histogram r = sample_simplex(8, 3), c = sample_simplex(8, 4);
    const CostMatrix m = median_normalize(random_points_metric(8, 5));
    for (double alpha : {0.05, 0.2, 0.5}) {
      const AlphaSolveReport rep = sinkhorn_alpha(r, c, m, AlphaBall(alpha));
      CHECK(rep.boundary == AlphaBoundary::kNone);
      CHECK(std::abs(rep.achieved_entropy - rep.target_entropy) <= 1e-4);
      CHECK(rep.plan.has_marginals(r.weights(), c.weights(), 1e-8));
      CHECK(mutual_information(rep.plan) <= alpha + 1e-4);
      CHECK(rep.lambda_star > 0.0);
    }
  }

  TEST_CASE("value is non-increasing in alpha") {
    for (std::uint64_t s = 0; s < 15; ++s) {
      const Histogram r = sample_simplex(6, s), c = sample_simplex(6, s + 7);
      const CostMatrix m = median_normalize(random_points_metric(6, s + 1));
      double previous = std::numeric_limits<double>::infinity();
      for (double alpha : {0.0, 0.02, 0.1, 0.3, 0.6, 1.0}) {
        const double v = sinkhorn_alpha(r, c, m, AlphaBall(alpha)).value;
        CHECK(v <= previous + 1e-6);
        previous = v;
      }
    }
  }

  TEST_CASE("boundary flag can be disabled") {
    const Histogram r = sample_simplex(6, 1), c = sample_simplex(6, 2);
    const CostMatrix m = median_normalize(random_points_metric(6, 3));
    AlphaOptions strict;
    strict.allow_boundary = false;
    strict.max_exponent = 2.0;
    CHECK_THROWS_AS(sinkhorn_alpha(r, c, m, AlphaBall(entropy(r) + entropy(c)), strict), SolverError);
    AlphaOptions lenient;
    lenient.max_exponent = 2.0;
    CHECK(sinkhorn_alpha(r, c, m, AlphaBall(entropy(r) + entropy(c)), lenient).boundary == AlphaBoundary::kLambdaMax);
  }

  TEST_CASE("coincidence wrapper") {
    const Histogram r = sample_simplex(5, 1);
    const CostMatrix m = random_points_metric(5, 2);
    CHECK(coincidence_wrapped_distance(r, r, m, AlphaBall(0.3)) == 0.0);

    const Histogram uniform(Vector::Constant(5, 0.2));
    const Histogram point(Vector{{1, 0, 0, 0, 0}});
    CHECK(coincidence_wrapped_distance(uniform, point, m, AlphaBall(0.3)) ==
          sinkhorn_alpha(uniform, point, m, AlphaBall(0.3)).value);
  }

  TEST_CASE("distance axioms on random triples") {
    for (std::uint64_t s = 0; s < 40; ++s) {
      const CostMatrix m = as_validated_metric(random_points_metric(8, s));
      const Histogram x = sample_simplex(8, 3 * s), y = sample_simplex(8, 3 * s + 1), z = sample_simplex(8, 3 * s + 2);
      const AlphaBall a(0.2);
      const double xy = coincidence_wrapped_distance(x, y, m, a), yx = coincidence_wrapped_distance(y, x, m, a);
      const double yz = coincidence_wrapped_distance(y, z, m, a), xz = coincidence_wrapped_distance(x, z, m, a);
      CHECK(std::abs(xy - yx) <= 1e-8);
      CHECK(xz <= xy + yz + 1e-6);
    }
  }
}
