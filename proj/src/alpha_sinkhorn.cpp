#include "sinkdist/alpha_sinkhorn.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

constexpr double kMarginalTarget = 1e-13;

struct Evaluation {
  double lambda;
  double entropy;
  double value;
  Vector x;  // final iterate, reused as a warm start
  TransportPlan plan;
};

class EntropyProbe {
 public:
  EntropyProbe(const Histogram& r, const Histogram& c, const CostMatrix& m, const AlphaOptions& opts)
      : r_(r), c_(c), m_(m), opts_(opts) {}

  Evaluation at(double lambda) {
    const GibbsKernel k(m_, lambda, r_);
    double tol = opts_.inner_tolerance;
    const Vector* warm = last_x_ ? &*last_x_ : nullptr;
    auto config = [&] { return SinkhornConfig::with_tolerance(lambda, tol, opts_.inner_max_iterations); };
    SinkhornResult res = sinkhorn_divergence(k, c_, config(), warm);
    // A small step in x does not guarantee small marginal error when the
    // iteration contracts slowly; keep refining from the current iterate so
    // the entropy is a function of lambda alone, not of the warm start.
    for (int round = 0; round < 8 && res.marginal_error > kMarginalTarget; ++round) {
      tol *= 1e-2;
      const Vector x = res.u.cwiseInverse();
      res = sinkhorn_divergence(k, c_, config(), &x);
    }
    TransportPlan plan = recover_plan(res, k);
    const double h = plan_entropy(plan);
    last_x_ = res.u.cwiseInverse();
    return {lambda, h, res.divergence, *last_x_, std::move(plan)};
  }

 private:
  const Histogram& r_;
  const Histogram& c_;
  const CostMatrix& m_;
  const AlphaOptions& opts_;
  std::optional<Vector> last_x_;
};

double positive_scale(const Matrix& m) {
  const double med = median_of_entries(m);
  if (med > 0.0) return med;
  // Tiny matrices whose median is a diagonal zero: fall back to the mean positive entry.
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    if (m.data()[k] > 0.0) {
      sum += m.data()[k];
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 1.0;
}

AlphaSolveReport from_evaluation(Evaluation e, double target, int steps, AlphaBoundary boundary) {
  return {e.value, e.lambda, e.entropy, target, steps, boundary, std::move(e.plan)};
}

}  // namespace

double entropy_target(const Histogram& r, const Histogram& c, const AlphaBall& alpha) {
  return entropy(r) + entropy(c) - alpha.alpha();
}

AlphaSolveReport sinkhorn_alpha(const Histogram& r, const Histogram& c, const CostMatrix& m, const AlphaBall& alpha,
                                const AlphaOptions& opts) {
  if (r.size() != m.size() || c.size() != m.size()) throw DomainError("sinkhorn_alpha: dimension mismatch");
  if (!(opts.entropy_tolerance > 0.0)) throw DomainError("sinkhorn_alpha: entropy tolerance must be positive");
  const double target = entropy_target(r, c, alpha);
  const double tol = opts.entropy_tolerance;

  auto independence = [&] {
    TransportPlan table = independence_table(r, c);
    const double value = r.weights().dot(m.entries() * c.weights());
    const double h = plan_entropy(table);
    return AlphaSolveReport{value, 0.0, h, target, 0, AlphaBoundary::kIndependence, std::move(table)};
  };
  // Entropy of the independence table is the maximum over U(r, c).
  if (target >= entropy(r) + entropy(c) - tol) return independence();

  const double max_cost = m.entries().maxCoeff();
  if (!(max_cost > 0.0)) return independence();  // every plan costs zero
  const double scale = positive_scale(m.entries());
  const double lambda_max = opts.max_exponent / max_cost;

  EntropyProbe probe(r, c, m, opts);
  int steps = 0;

  Evaluation lo = probe.at(std::min(1e-4 / scale, lambda_max));
  ++steps;
  if (lo.entropy <= target + tol) return independence();

  // Grow lambda until the entropy drops below the target.
  double lambda = std::max(1.0 / scale, lo.lambda * 2.0);
  std::optional<Evaluation> hi;
  while (!hi) {
    lambda = std::min(lambda, lambda_max);
    Evaluation e = probe.at(lambda);
    ++steps;
    if (std::abs(e.entropy - target) <= tol) return from_evaluation(std::move(e), target, steps, AlphaBoundary::kNone);
    if (e.entropy < target) {
      hi = std::move(e);
    } else if (lambda >= lambda_max) {
      if (!opts.allow_boundary) {
        std::ostringstream msg;
        msg << "sinkhorn_alpha: entropy " << e.entropy << " still above target " << target
            << " at the largest safe lambda " << lambda_max;
        throw SolverError(msg.str());
      }
      return from_evaluation(std::move(e), target, steps, AlphaBoundary::kLambdaMax);
    } else {
      lo = std::move(e);
      lambda *= 2.0;
    }
  }

  // Entropy decreases monotonically in lambda; bisect on log(lambda).
  for (int k = 0; k < opts.max_bisection_steps; ++k) {
    const double mid = std::sqrt(lo.lambda * hi->lambda);
    Evaluation e = probe.at(mid);
    ++steps;
    const bool done = std::abs(e.entropy - target) <= tol || hi->lambda / lo.lambda - 1.0 < 1e-13;
    if (done) return from_evaluation(std::move(e), target, steps, AlphaBoundary::kNone);
    if (e.entropy > target) {
      lo = std::move(e);
    } else {
      hi = std::move(e);
    }
  }
  throw SolverError("sinkhorn_alpha: bisection did not reach the entropy tolerance");
}

double coincidence_wrapped_distance(const Histogram& r, const Histogram& c, const CostMatrix& m,
                                    const AlphaBall& alpha, const AlphaOptions& opts) {
  if (r == c) return 0.0;
  return sinkhorn_alpha(r, c, m, alpha, opts).value;
}

}  // namespace sinkdist
