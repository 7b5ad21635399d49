#pragma once

#include "sinkdist/histogram.hpp"

namespace sinkdist {

/// A joint probability table with cached marginals: an element of U(r, c).
class TransportPlan {
 public:
  // Validates nonnegativity and unit total mass; marginals are computed from
  // the entries.
  explicit TransportPlan(Matrix entries);

  [[nodiscard]] const Matrix& entries() const noexcept { return entries_; }
  [[nodiscard]] Eigen::Index rows() const noexcept { return entries_.rows(); }
  [[nodiscard]] Eigen::Index cols() const noexcept { return entries_.cols(); }
  [[nodiscard]] const Vector& row_marginal() const noexcept { return row_marginal_; }
  [[nodiscard]] const Vector& col_marginal() const noexcept { return col_marginal_; }

  // Frobenius inner product with a cost matrix.
  [[nodiscard]] double cost(const Matrix& m) const;

  // True when the marginals match (r, c) within tol.
  [[nodiscard]] bool has_marginals(const Vector& r, const Vector& c, double tol = kMassTolerance) const;

 private:
  Matrix entries_;
  Vector row_marginal_;
  Vector col_marginal_;
};

/// Mutual-information budget of the KL ball around the independence table.
class AlphaBall {
 public:
  explicit AlphaBall(double alpha);
  [[nodiscard]] double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// r c^T, the maximum entropy element of U(r, c).
TransportPlan independence_table(const Histogram& r, const Histogram& c);

double plan_entropy(const TransportPlan& p);
double plan_entropy(const Matrix& p);

/// KL(P || r c^T) = h(r) + h(c) - h(P), summed over positive entries directly.
double mutual_information(const TransportPlan& p);

/// Same quantity through the entropy identity; used to cross-check the direct sum.
double mutual_information_via_entropies(const TransportPlan& p);

bool in_alpha_ball(const TransportPlan& p, const AlphaBall& alpha);

/// Composes P in U(x, y) and Q in U(y, z) into S in U(x, z) with
/// s_ik = sum_j p_ij q_jk / y_j, skipping j with y_j = 0.
TransportPlan glue(const TransportPlan& p, const TransportPlan& q);

}  // namespace sinkdist
