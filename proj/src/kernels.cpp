#include "sinkdist/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

// Negative eigenvalues of the centred Gram matrix larger in magnitude than
// this fraction of the top eigenvalue mean M is not an EDM.
constexpr double kEdmRelativeTolerance = 1e-6;

void require_same_size(const Histogram& r, const Histogram& c, const char* what) {
  if (r.size() != c.size()) {
    throw DomainError(std::string(what) + ": dimension mismatch " + std::to_string(r.size()) + " vs " +
                      std::to_string(c.size()));
  }
}

}  // namespace

std::optional<BaselineKind> parse_baseline_kind(std::string_view name) {
  if (name == "hellinger") return BaselineKind::kHellinger;
  if (name == "chi2") return BaselineKind::kChi2;
  if (name == "tv" || name == "total_variation") return BaselineKind::kTotalVariation;
  if (name == "sqeuclid" || name == "squared_euclidean") return BaselineKind::kSquaredEuclidean;
  return std::nullopt;
}

std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kHellinger: return "hellinger";
    case BaselineKind::kChi2: return "chi2";
    case BaselineKind::kTotalVariation: return "tv";
    case BaselineKind::kSquaredEuclidean: return "sqeuclid";
  }
  return "unknown";
}

double baseline_distance(BaselineKind kind, const Histogram& r, const Histogram& c) {
  require_same_size(r, c, "baseline_distance");
  const auto& a = r.weights();
  const auto& b = c.weights();
  switch (kind) {
    case BaselineKind::kHellinger:
      return (a.array().sqrt() - b.array().sqrt()).square().sum();
    case BaselineKind::kChi2: {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double s = a[i] + b[i];
        if (s > 0.0) sum += (a[i] - b[i]) * (a[i] - b[i]) / s;
      }
      return sum;
    }
    case BaselineKind::kTotalVariation:
      return 0.5 * (a - b).cwiseAbs().sum();
    case BaselineKind::kSquaredEuclidean:
      return (a - b).squaredNorm();
  }
  throw DomainError("baseline_distance: unknown kind");
}

double independence_kernel_distance(const Histogram& r, const Histogram& c, const CostMatrix& m) {
  require_same_size(r, c, "independence_kernel_distance");
  if (r.size() != m.size()) throw DomainError("independence_kernel_distance: cost matrix dimension mismatch");
  return r.weights().dot(m.entries() * c.weights());
}

IndependenceKernelPrecompute independence_precompute(const CostMatrix& m) {
  const Eigen::Index d = m.size();
  const Matrix& mm = m.entries();
  if (((mm - mm.transpose()).array().abs() > 1e-9 * std::max(1.0, mm.maxCoeff())).any()) {
    throw DomainError("independence_precompute: cost matrix is not symmetric");
  }
  // K = -1/2 J M J, J = I - 11^T / d.
  const Vector row_mean = mm.rowwise().mean();
  const Vector col_mean = mm.colwise().mean().transpose();
  const double grand = mm.mean();
  Matrix gram = mm;
  gram.colwise() -= row_mean;
  gram.rowwise() -= col_mean.transpose();
  gram.array() += grand;
  gram *= -0.5;
  gram = 0.5 * (gram + gram.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw NumericError("independence_precompute: eigensolver failed");
  Vector values = eig.eigenvalues();
  const double top = std::max(values.maxCoeff(), 0.0);
  const double lowest = values.minCoeff();
  if (lowest < -kEdmRelativeTolerance * std::max(top, 1e-300)) {
    std::ostringstream msg;
    msg << "independence_precompute: cost matrix is not a Euclidean distance matrix (centred Gram eigenvalue "
        << lowest << ", largest " << top << ")";
    throw DomainError(msg.str());
  }
  IndependenceKernelPrecompute out;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (values[k] < 0.0) {
      out.clipped_ += -values[k];
      values[k] = 0.0;
    }
  }
  // F F^T = K with F = V sqrt(Lambda); a QR of F^T = Q R gives K = R^T R,
  // i.e. a lower triangular factor L = R^T even when K is singular.
  const Matrix ft = values.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  Eigen::HouseholderQR<Matrix> qr(ft);
  out.factor_ = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  out.norms_ = out.factor_.rowwise().squaredNorm();
  return out;
}

Vector IndependenceKernelPrecompute::project(const Histogram& r) const {
  if (r.size() != factor_.rows()) throw DomainError("independence kernel: dimension mismatch");
  return factor_.transpose() * r.weights();
}

double IndependenceKernelPrecompute::distance_projected(const Histogram& r, const Vector& lr, const Histogram& c,
                                                        const Vector& lc) const {
  return r.weights().dot(norms_) + c.weights().dot(norms_) - 2.0 * lr.dot(lc);
}

double IndependenceKernelPrecompute::distance(const Histogram& r, const Histogram& c) const {
  return distance_projected(r, project(r), c, project(c));
}

Matrix IndependenceKernelPrecompute::reconstruct() const {
  Matrix k = factor_ * factor_.transpose();
  Matrix out = -2.0 * k;
  out.colwise() += norms_;
  out.rowwise() += norms_.transpose();
  return out;
}

KernelMatrix kernel_matrix(const Matrix& distances, double t) {
  if (distances.rows() != distances.cols()) throw DomainError("kernel_matrix: distance matrix is not square");
  if (!(t > 0.0)) throw DomainError("kernel_matrix: bandwidth must be positive");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  if (((distances - distances.transpose()).array().abs() > 1e-12 * scale).any()) {
    throw DomainError("kernel_matrix: distance matrix is not symmetric");
  }
  KernelMatrix out;
  out.bandwidth_t = t;
  out.entries = (-distances.array() / t).exp().matrix();
  out.entries = 0.5 * (out.entries + out.entries.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.entries, Eigen::EigenvaluesOnly);
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest < -1e-10) {
    out.diagonal_regularizer = -lowest + 1e-10;
    out.entries.diagonal().array() += out.diagonal_regularizer;
  }
  return out;
}

double quantile(std::span<const double> sample, double p) {
  if (sample.empty()) throw DomainError("quantile: empty sample");
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

std::array<double, 4> bandwidth_grid(std::span<const double> sample) {
  if (sample.empty()) throw DomainError("bandwidth_grid: empty sample");
  return {1.0, quantile(sample, 0.10), quantile(sample, 0.20), quantile(sample, 0.50)};
}

}  // namespace sinkdist
