#pragma once

#include <variant>
#include <vector>

#include "sinkdist/ground_metric.hpp"
#include "sinkdist/transport.hpp"

namespace sinkdist {

// Stop once the Euclidean norm of the change in the iterate x drops to `value`.
struct ToleranceStop {
  double value = 0.01;
};

// Run exactly `count` fixed-point updates.
struct FixedIterationsStop {
  int count = 20;
};

using StopRule = std::variant<ToleranceStop, FixedIterationsStop>;

struct SinkhornConfig {
  double lambda = 1.0;
  StopRule stop = ToleranceStop{};
  int max_iterations = 100000;

  static SinkhornConfig with_tolerance(double lambda, double tol, int max_iterations = 100000) {
    return {lambda, ToleranceStop{tol}, max_iterations};
  }
  static SinkhornConfig fixed(double lambda, int iterations) {
    return {lambda, FixedIterationsStop{iterations}, iterations};
  }

  // Throws DomainError on a non-positive lambda, tolerance, or iteration count.
  void validate() const;
};

/// exp(-lambda * M) restricted to the rows where r is positive, together with
/// the precomputed product K .* M used by the divergence.
class GibbsKernel {
 public:
  GibbsKernel(const CostMatrix& m, double lambda, const Histogram& r);

  [[nodiscard]] const Matrix& entries() const noexcept { return k_; }
  [[nodiscard]] const Matrix& weighted_cost() const noexcept { return km_; }
  // Rows of M on the support, kept for the log-domain fallback.
  [[nodiscard]] const Matrix& cost_rows() const noexcept { return cost_; }
  [[nodiscard]] const std::vector<Eigen::Index>& support_index() const noexcept { return support_; }
  [[nodiscard]] const Vector& support_mass() const noexcept { return r_support_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return k_.cols(); }

 private:
  Matrix k_;
  Matrix km_;
  Matrix cost_;
  std::vector<Eigen::Index> support_;
  Vector r_support_;
  double lambda_;
};

GibbsKernel gibbs_kernel(const CostMatrix& m, double lambda, const Histogram& r);

struct SinkhornResult {
  Vector u;  // indexed by the kernel's support rows
  Vector v;  // full length; v_j = 0 exactly where c_j = 0
  // log u and log v (-inf where v_j = 0). When the scalings leave the double
  // range the iteration continues on these and u, v may saturate.
  Vector log_u;
  Vector log_v;
  bool log_domain = false;
  double divergence = 0.0;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;       // norm of the final x update
  double marginal_error = 0.0;    // l1 distance between the plan's row sums and r
};

/// Dual-Sinkhorn divergence d_M^lambda(r, c) by Sinkhorn-Knopp scaling.
/// The fixed point is iterated multiplicatively; if the iterate leaves the
/// representable range the same update continues with log-sum-exp, and the
/// stop rule then measures the Euclidean change of log x.
SinkhornResult sinkhorn_divergence(const Histogram& r, const Histogram& c, const CostMatrix& m,
                                   const SinkhornConfig& cfg);

/// Same, reusing a kernel built for r. `warm_x` (support-sized, positive)
/// replaces the uniform starting iterate when given.
SinkhornResult sinkhorn_divergence(const GibbsKernel& k, const Histogram& c, const SinkhornConfig& cfg,
                                   const Vector* warm_x = nullptr);

/// One-vs-many: columns of `targets` are histograms. Each column freezes once
/// it meets the stop rule; the loop ends when all columns have.
std::vector<SinkhornResult> sinkhorn_batch(const Histogram& r, const Matrix& targets, const CostMatrix& m,
                                           const SinkhornConfig& cfg);
std::vector<SinkhornResult> sinkhorn_batch(const GibbsKernel& k, const Matrix& targets, const SinkhornConfig& cfg);

/// diag(u) K diag(v), expanded back to d x d with zero rows off the support.
TransportPlan recover_plan(const SinkhornResult& result, const GibbsKernel& k);

}  // namespace sinkdist
