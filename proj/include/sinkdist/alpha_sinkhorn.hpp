#pragma once

#include "sinkdist/ground_metric.hpp"
#include "sinkdist/sinkhorn.hpp"
#include "sinkdist/transport.hpp"

namespace sinkdist {

enum class AlphaBoundary {
  kNone,          // entropy target met by bisection
  kIndependence,  // target reached at the lambda -> 0 end; value is r^T M c
  kLambdaMax,     // entropy still above target at the largest safe lambda
};

struct AlphaOptions {
  double entropy_tolerance = 1e-4;  // nats
  double inner_tolerance = 1e-9;    // Sinkhorn stop rule on x during bisection
  int inner_max_iterations = 2'000'000;
  // Largest lambda * max(M) the plain scaling iteration is allowed to reach.
  double max_exponent = 400.0;
  int max_bisection_steps = 200;
  bool allow_boundary = true;
};

struct AlphaSolveReport {
  double value = 0.0;
  double lambda_star = 0.0;  // 0 for the independence boundary
  double achieved_entropy = 0.0;
  double target_entropy = 0.0;
  int bisection_steps = 0;
  AlphaBoundary boundary = AlphaBoundary::kNone;
  TransportPlan plan;
};

/// Minimum entropy h(r) + h(c) - alpha a plan must keep to lie in U_alpha(r, c).
double entropy_target(const Histogram& r, const Histogram& c, const AlphaBall& alpha);

/// Sinkhorn distance d_{M,alpha}: cost of the entropic optimum whose entropy
/// matches the target, found by bisection on log(lambda).
AlphaSolveReport sinkhorn_alpha(const Histogram& r, const Histogram& c, const CostMatrix& m, const AlphaBall& alpha,
                                const AlphaOptions& opts = {});

/// 1_{r != c} d_{M,alpha}(r, c); exactly zero when r and c are entrywise equal.
double coincidence_wrapped_distance(const Histogram& r, const Histogram& c, const CostMatrix& m,
                                    const AlphaBall& alpha, const AlphaOptions& opts = {});

}  // namespace sinkdist
