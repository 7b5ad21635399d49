#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "sinkdist/errors.hpp"
#include "sinkdist/transport.hpp"
#include "test_support.hpp"

using namespace sinkdist;

namespace {
const double kLog2 = std::log(2.0);
const Histogram kHalf(Vector{{0.5, 0.5}});
}  // namespace

TEST_SUITE("transport_core") {
  TEST_CASE("plan validation") {
    CHECK_THROWS_AS(TransportPlan(Matrix{{0.5, 0.6}, {0, 0}}), DomainError);
    CHECK_THROWS_AS(TransportPlan(Matrix{{1.2, -0.2}, {0, 0}}), DomainError);
    const TransportPlan p(Matrix{{0.1, 0.2}, {0.3, 0.4}});
    CHECK(p.has_marginals(Vector{{0.3, 0.7}}, Vector{{0.4, 0.6}}));
    CHECK_FALSE(p.has_marginals(Vector{{0.5, 0.5}}, Vector{{0.4, 0.6}}));
    CHECK(p.cost(Matrix{{0, 1}, {1, 0}}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(AlphaBall(-0.1), DomainError);
  }

  TEST_CASE("independence table") {
    const TransportPlan t = independence_table(kHalf, kHalf);
    CHECK(t.entries() == Matrix::Constant(2, 2, 0.25));
    CHECK(plan_entropy(t) == doctest::Approx(2 * kLog2).epsilon(1e-14));
    for (std::uint64_t s = 0; s < 50; ++s) {
      const Histogram r = sample_simplex(7, s), c = sample_simplex(7, s + 1000);
      const TransportPlan rc = independence_table(r, c);
      CHECK(std::abs(plan_entropy(rc) - entropy(r) - entropy(c)) <= 1e-12);
      CHECK((rc.row_marginal() - r.weights()).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK((rc.col_marginal() - c.weights()).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(std::abs(mutual_information(rc)) <= 1e-14);
    }
  }

  TEST_CASE("diagonal plan") {
    const TransportPlan d(Matrix{{0.5, 0}, {0, 0.5}});
    CHECK(plan_entropy(d) == doctest::Approx(kLog2));
    CHECK(mutual_information(d) == doctest::Approx(kLog2));
    CHECK_FALSE(in_alpha_ball(d, AlphaBall(0.0)));
    CHECK(in_alpha_ball(independence_table(kHalf, kHalf), AlphaBall(0.0)));
  }

  TEST_CASE("entropy upper bound and the two mutual information routes") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const TransportPlan p(testsupport::random_plan(6, 5, s, s % 2 == 0));
      const double hr = entropy(p.row_marginal()), hc = entropy(p.col_marginal());
      CHECK(plan_entropy(p) <= hr + hc + 1e-12);
      CHECK(plan_entropy(p) >= std::max(hr, hc) - 1e-12);
      CHECK(std::abs(mutual_information(p) - mutual_information_via_entropies(p)) <= 1e-12);
      CHECK(std::abs(mutual_information(p) - oracle::mutual_information(p.entries())) <= 1e-12);
      CHECK(in_alpha_ball(p, AlphaBall(hr + hc)));
    }
  }

  TEST_CASE("gluing independence tables") {
    const Histogram x = sample_simplex(5, 1), y = sample_simplex(5, 2), z = sample_simplex(5, 3);
    const TransportPlan s = glue(independence_table(x, y), independence_table(y, z));
    CHECK((s.entries() - x.weights() * z.weights().transpose()).cwiseAbs().maxCoeff() <= 1e-16);
  }

  TEST_CASE("gluing keeps marginals and cannot raise mutual information") {
    for (std::uint64_t s = 0; s < 1000; ++s) {
      const TransportPlan p(testsupport::random_plan(10, 10, 2 * s, s % 3 == 0));
      // Q shares P's column marginal y: scale rows of a random table to y.
      Matrix q = testsupport::random_plan(10, 10, 2 * s + 1, s % 5 == 0);
      const Vector y = p.col_marginal();
      for (Eigen::Index j = 0; j < 10; ++j) {
        const double row = q.row(j).sum();
        if (row > 0.0) {
          q.row(j) *= y[j] / row;
        } else {
          q.row(j).setConstant(y[j] / 10.0);
        }
      }
      const TransportPlan qp(q);
      const TransportPlan g = glue(p, qp);
      CHECK((g.row_marginal() - p.row_marginal()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((g.col_marginal() - qp.col_marginal()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(oracle::mutual_information(g.entries()) <= oracle::mutual_information(p.entries()) + 1e-9);
    }
  }

  TEST_CASE("glue rejects mismatched marginals") {
    const TransportPlan p(Matrix{{0.5, 0}, {0, 0.5}});
    const TransportPlan q(Matrix{{0.9, 0}, {0, 0.1}});
    CHECK_THROWS_AS(glue(p, q), DomainError);
  }
}
