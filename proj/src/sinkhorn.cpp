#include "sinkdist/sinkhorn.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

constexpr double kUnderflowFloor = 1e-300;
// Multiplicative iterates outside [1/kRangeGuard, kRangeGuard] hand over to the log-domain loop.
constexpr double kRangeGuard = 1e250;
// Below this many active columns, matrix-vector products beat repacking K for a GEMM.
constexpr Eigen::Index kGemvWidth = 4;

bool out_of_range(const Eigen::Ref<const Vector>& x) {
  return !x.allFinite() || !(x.array() > 1.0 / kRangeGuard).all() || !(x.array() < kRangeGuard).all();
}

double log_sum_exp(const Eigen::Ref<const Vector>& a) {
  const double top = a.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((a.array() - top).exp().sum());
}

[[noreturn]] void throw_non_finite(int it, Eigen::Index col, double lambda) {
  std::ostringstream msg;
  msg << "sinkhorn: non-finite iterate at iteration " << it << " (column " << col << ", lambda=" << lambda
      << "); reduce lambda or normalize the cost matrix";
  throw NumericError(msg.str());
}

// The same fixed point in the coordinates f = log u = -log x, g = log v:
//   g_j = log c_j - LSE_i(f_i - lambda m_ij),  f_i = log r_i - LSE_j(g_j - lambda m_ij).
// Continues from iteration `done` with starting point f.
SinkhornResult run_log_domain(const GibbsKernel& k, const Eigen::Ref<const Vector>& c, Vector f, int done, int limit,
                              double tol, bool fixed, Eigen::Index col) {
  const Matrix neg = -k.lambda() * k.cost_rows();
  const Vector log_r = k.support_mass().array().log();
  const Eigen::Index s = neg.rows(), d = neg.cols();
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (c[j] > 0.0) live.push_back(j);
  }
  const auto nl = static_cast<Eigen::Index>(live.size());
  Matrix neg_live(s, nl);
  Vector log_c(nl);
  for (Eigen::Index b = 0; b < nl; ++b) {
    neg_live.col(b) = neg.col(live[static_cast<std::size_t>(b)]);
    log_c[b] = std::log(c[live[static_cast<std::size_t>(b)]]);
  }
  auto update_g = [&](const Vector& fv) {
    Vector g(nl);
    for (Eigen::Index b = 0; b < nl; ++b) g[b] = log_c[b] - log_sum_exp(fv + neg_live.col(b));
    return g;
  };

  SinkhornResult res;
  res.log_domain = true;
  for (int it = done + 1; it <= limit; ++it) {
    const Vector g = update_g(f);
    Vector fn(s);
    for (Eigen::Index a = 0; a < s; ++a) fn[a] = log_r[a] - log_sum_exp(g + neg_live.row(a).transpose());
    if (!fn.allFinite()) throw_non_finite(it, col, k.lambda());
    res.last_change = (fn - f).norm();
    res.iterations = it;
    f = std::move(fn);
    if (fixed ? it == limit : res.last_change <= tol) {
      res.converged = true;
      break;
    }
  }

  const Vector g = update_g(f);
  res.log_u = f;
  res.log_v = Vector::Constant(d, -std::numeric_limits<double>::infinity());
  for (Eigen::Index b = 0; b < nl; ++b) res.log_v[live[static_cast<std::size_t>(b)]] = g[b];
  res.u = f.array().exp();
  res.v = res.log_v.array().exp();
  double divergence = 0.0, marginal = 0.0;
  for (Eigen::Index a = 0; a < s; ++a) {
    const Vector row = (f[a] + g.array() + neg_live.row(a).transpose().array()).exp();
    double cost = 0.0;
    for (Eigen::Index b = 0; b < nl; ++b) cost += row[b] * k.cost_rows()(a, live[static_cast<std::size_t>(b)]);
    divergence += cost;
    marginal += std::abs(row.sum() - k.support_mass()[a]);
  }
  res.divergence = divergence;
  res.marginal_error = marginal;
  return res;
}

void check_targets(const Matrix& targets, Eigen::Index d) {
  if (targets.rows() != d) {
    throw DomainError("sinkhorn: target histograms have dimension " + std::to_string(targets.rows()) +
                      ", expected " + std::to_string(d));
  }
  for (Eigen::Index a = 0; a < targets.cols(); ++a) {
    // Throws DomainError if the column is not a histogram.
    try {
      Histogram h(targets.col(a));
    } catch (const DomainError& e) {
      throw DomainError("sinkhorn: target column " + std::to_string(a) + ": " + e.what());
    }
  }
}

// c ./ w with the convention 0 / w = 0.
Matrix scaled_targets(const Matrix& c, const Matrix& w) {
  return c.binaryExpr(w, [](double cj, double wj) { return cj > 0.0 ? cj / wj : 0.0; });
}

// Algorithm core shared by the single-pair and batched entry points:
// x <- diag(1/r) K (c ./ (K^T (1 ./ x))), column by column, each column
// frozen as soon as it satisfies the stop rule.
std::vector<SinkhornResult> run_scaling(const GibbsKernel& k, const Matrix& targets, const SinkhornConfig& cfg,
                                        const Matrix* warm) {
  cfg.validate();
  const Matrix& kern = k.entries();
  const Vector& rs = k.support_mass();
  const Eigen::Index s = kern.rows();
  const Eigen::Index n = targets.cols();

  Matrix x;
  if (warm != nullptr && warm->rows() == s && warm->cols() == n && (warm->array() > 0.0).all()) {
    x = *warm;
  } else {
    x = Matrix::Constant(s, n, 1.0 / static_cast<double>(s));
  }

  const bool fixed = std::holds_alternative<FixedIterationsStop>(cfg.stop);
  const int limit = fixed ? std::get<FixedIterationsStop>(cfg.stop).count : cfg.max_iterations;
  const double tol = fixed ? 0.0 : std::get<ToleranceStop>(cfg.stop).value;

  std::vector<SinkhornResult> out(static_cast<std::size_t>(n));
  std::vector<char> in_log_domain(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> active(static_cast<std::size_t>(n));
  std::iota(active.begin(), active.end(), Eigen::Index{0});

  // Active columns are kept compacted at the front of the work buffers, which
  // are allocated once; large temporaries per iteration cost page faults.
  Matrix xw = x, cw = targets;
  Matrix inv(s, n), w(targets.rows(), n), t(targets.rows(), n), xn(s, n);
  std::vector<Eigen::Index>& idx = active;
  Eigen::Index na = n;
  for (int it = 1; it <= limit && na > 0; ++it) {
    inv.leftCols(na) = xw.leftCols(na).cwiseInverse();
    if (na <= kGemvWidth) {
      for (Eigen::Index a = 0; a < na; ++a) w.col(a).noalias() = kern.transpose() * inv.col(a);
    } else {
      w.leftCols(na).noalias() = kern.transpose() * inv.leftCols(na);
    }
    t.leftCols(na) = scaled_targets(cw.leftCols(na), w.leftCols(na));
    if (na <= kGemvWidth) {
      for (Eigen::Index a = 0; a < na; ++a) xn.col(a).noalias() = kern * t.col(a);
    } else {
      xn.leftCols(na).noalias() = kern * t.leftCols(na);
    }
    xn.leftCols(na).array().colwise() /= rs.array();

    Eigen::Index keep = 0;
    for (Eigen::Index a = 0; a < na; ++a) {
      const Eigen::Index col = idx[static_cast<std::size_t>(a)];
      auto& res = out[static_cast<std::size_t>(col)];
      if (out_of_range(xn.col(a))) {
        const Vector f = -xw.col(a).array().log();
        res = run_log_domain(k, targets.col(col), f, it - 1, limit, tol, fixed, col);
        in_log_domain[static_cast<std::size_t>(col)] = 1;
        continue;
      }
      res.iterations = it;
      res.last_change = (xn.col(a) - xw.col(a)).norm();
      x.col(col) = xn.col(a);
      const bool done = fixed ? it == limit : res.last_change <= tol;
      res.converged = done;
      if (!done) {
        xw.col(keep) = xn.col(a);
        cw.col(keep) = cw.col(a);
        idx[static_cast<std::size_t>(keep)] = col;
        ++keep;
      }
    }
    na = keep;
  }

  const Matrix u = x.cwiseInverse();
  const Matrix v = scaled_targets(targets, kern.transpose() * u);
  const Matrix weighted = k.weighted_cost() * v;
  const Matrix kv = kern * v;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (in_log_domain[static_cast<std::size_t>(a)]) continue;
    auto& res = out[static_cast<std::size_t>(a)];
    res.u = u.col(a);
    res.v = v.col(a);
    res.log_u = res.u.array().log();
    res.log_v = res.v.array().log();
    res.divergence = u.col(a).dot(weighted.col(a));
    res.marginal_error = (u.col(a).cwiseProduct(kv.col(a)) - rs).cwiseAbs().sum();
    if (!std::isfinite(res.divergence)) {
      std::ostringstream msg;
      msg << "sinkhorn: non-finite divergence for column " << a << " (lambda=" << k.lambda() << ")";
      throw NumericError(msg.str());
    }
  }
  return out;
}

}  // namespace

void SinkhornConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("sinkhorn: lambda must be positive");
  if (const auto* t = std::get_if<ToleranceStop>(&stop)) {
    if (!(t->value > 0.0)) throw DomainError("sinkhorn: tolerance must be positive");
    if (max_iterations < 1) throw DomainError("sinkhorn: max_iterations must be positive");
  } else if (std::get<FixedIterationsStop>(stop).count < 1) {
    throw DomainError("sinkhorn: fixed iteration count must be positive");
  }
}

GibbsKernel::GibbsKernel(const CostMatrix& m, double lambda, const Histogram& r) : lambda_(lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("gibbs_kernel: lambda must be positive");
  const Eigen::Index d = m.size();
  if (r.size() != d) throw DomainError("gibbs_kernel: histogram dimension does not match cost matrix");
  for (Eigen::Index i = 0; i < d; ++i) {
    if (r[i] > 0.0) support_.push_back(i);
  }
  const auto s = static_cast<Eigen::Index>(support_.size());
  r_support_.resize(s);
  if (s == d) {
    cost_ = m.entries();
    r_support_ = r.weights();
  } else {
    cost_.resize(s, d);
    for (Eigen::Index a = 0; a < s; ++a) {
      const Eigen::Index i = support_[static_cast<std::size_t>(a)];
      cost_.row(a) = m.entries().row(i);
      r_support_[a] = r[i];
    }
  }
  k_ = (-lambda * cost_.array()).exp().matrix();
  // The packet exp clamps its argument near -708; deep-tail entries must be
  // exact (or subnormal) because the scalings can grow large enough to use them.
  for (Eigen::Index e = 0; e < k_.size(); ++e) {
    const double arg = -lambda * cost_.data()[e];
    if (arg < -700.0) k_.data()[e] = std::exp(arg);
  }
  km_ = k_.cwiseProduct(cost_);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (k_.col(j).maxCoeff() < kUnderflowFloor) {
      std::ostringstream msg;
      msg << "gibbs_kernel: column " << j << " underflows (lambda * max(M) = " << lambda * m.entries().maxCoeff()
          << "); choose a smaller lambda or median-normalize M";
      throw NumericError(msg.str());
    }
  }
}

GibbsKernel gibbs_kernel(const CostMatrix& m, double lambda, const Histogram& r) { return GibbsKernel(m, lambda, r); }

SinkhornResult sinkhorn_divergence(const GibbsKernel& k, const Histogram& c, const SinkhornConfig& cfg,
                                   const Vector* warm_x) {
  if (c.size() != k.dimension()) throw DomainError("sinkhorn: histogram dimension does not match kernel");
  const Matrix target = c.weights();
  if (warm_x != nullptr) {
    const Matrix warm = *warm_x;
    return run_scaling(k, target, cfg, &warm).front();
  }
  return run_scaling(k, target, cfg, nullptr).front();
}

SinkhornResult sinkhorn_divergence(const Histogram& r, const Histogram& c, const CostMatrix& m,
                                   const SinkhornConfig& cfg) {
  cfg.validate();
  if (c.size() != m.size()) throw DomainError("sinkhorn: histogram dimension does not match cost matrix");
  return sinkhorn_divergence(GibbsKernel(m, cfg.lambda, r), c, cfg);
}

std::vector<SinkhornResult> sinkhorn_batch(const GibbsKernel& k, const Matrix& targets, const SinkhornConfig& cfg) {
  check_targets(targets, k.dimension());
  return run_scaling(k, targets, cfg, nullptr);
}

std::vector<SinkhornResult> sinkhorn_batch(const Histogram& r, const Matrix& targets, const CostMatrix& m,
                                           const SinkhornConfig& cfg) {
  cfg.validate();
  return sinkhorn_batch(GibbsKernel(m, cfg.lambda, r), targets, cfg);
}

TransportPlan recover_plan(const SinkhornResult& result, const GibbsKernel& k) {
  const Eigen::Index d = k.dimension();
  Matrix plan = Matrix::Zero(d, d);
  const auto& support = k.support_index();
  for (std::size_t a = 0; a < support.size(); ++a) {
    const auto row = static_cast<Eigen::Index>(a);
    if (result.log_domain) {
      plan.row(support[a]) =
          (result.log_u[row] + result.log_v.array() - k.lambda() * k.cost_rows().row(row).transpose().array())
              .exp()
              .transpose();
    } else {
      plan.row(support[a]) = result.u[row] * k.entries().row(row).cwiseProduct(result.v.transpose());
    }
  }
  return TransportPlan(std::move(plan));
}

}  // namespace sinkdist
