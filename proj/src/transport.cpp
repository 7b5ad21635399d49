#include "sinkdist/transport.hpp"

#include <cmath>
#include <string>

#include "sinkdist/errors.hpp"

namespace sinkdist {

TransportPlan::TransportPlan(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0) throw DomainError("transport plan must be nonempty");
  if (!entries_.allFinite() || (entries_.array() < 0.0).any()) {
    throw DomainError("transport plan entries must be finite and nonnegative");
  }
  row_marginal_ = entries_.rowwise().sum();
  col_marginal_ = entries_.colwise().sum().transpose();
  const double mass = row_marginal_.sum();
  if (std::abs(mass - 1.0) > kMassTolerance) {
    throw DomainError("transport plan has total mass " + std::to_string(mass) + ", expected 1");
  }
}

double TransportPlan::cost(const Matrix& m) const {
  if (m.rows() != rows() || m.cols() != cols()) throw DomainError("plan/cost dimension mismatch");
  return entries_.cwiseProduct(m).sum();
}

bool TransportPlan::has_marginals(const Vector& r, const Vector& c, double tol) const {
  if (r.size() != rows() || c.size() != cols()) return false;
  return (row_marginal_ - r).cwiseAbs().maxCoeff() <= tol &&
         (col_marginal_ - c).cwiseAbs().maxCoeff() <= tol;
}

AlphaBall::AlphaBall(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
}

TransportPlan independence_table(const Histogram& r, const Histogram& c) {
  if (r.size() != c.size()) {
    throw DomainError("independence_table: dimension mismatch " + std::to_string(r.size()) + " vs " +
                      std::to_string(c.size()));
  }
  return TransportPlan(r.weights() * c.weights().transpose());
}

double plan_entropy(const Matrix& p) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double x = p(i, j);
      if (x > 0.0) h -= x * std::log(x);
    }
  }
  return h;
}

double plan_entropy(const TransportPlan& p) { return plan_entropy(p.entries()); }

double mutual_information(const TransportPlan& p) {
  const Matrix& e = p.entries();
  const Vector& r = p.row_marginal();
  const Vector& c = p.col_marginal();
  double mi = 0.0;
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      const double x = e(i, j);
      // x > 0 implies r_i, c_j > 0.
      if (x > 0.0) mi += x * (std::log(x) - std::log(r[i]) - std::log(c[j]));
    }
  }
  return mi;
}

double mutual_information_via_entropies(const TransportPlan& p) {
  return entropy(p.row_marginal()) + entropy(p.col_marginal()) - plan_entropy(p);
}

bool in_alpha_ball(const TransportPlan& p, const AlphaBall& alpha) {
  return mutual_information(p) <= alpha.alpha() + 1e-9;
}

TransportPlan glue(const TransportPlan& p, const TransportPlan& q) {
  if (p.cols() != q.rows()) throw DomainError("glue: inner dimensions differ");
  const Vector& y = q.row_marginal();
  const double gap = (p.col_marginal() - y).cwiseAbs().maxCoeff();
  if (gap > kMassTolerance) {
    throw DomainError("glue: column marginal of P differs from row marginal of Q by " + std::to_string(gap));
  }
  Vector inv_y(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) inv_y[j] = y[j] > 0.0 ? 1.0 / y[j] : 0.0;
  Matrix s = p.entries() * inv_y.asDiagonal() * q.entries();
  return TransportPlan(std::move(s));
}

}  // namespace sinkdist
