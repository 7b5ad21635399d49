#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "sinkdist/ground_metric.hpp"

namespace sinkdist {

enum class BaselineKind { kHellinger, kChi2, kTotalVariation, kSquaredEuclidean };

// Parses "hellinger", "chi2", "tv"/"total_variation", "sqeuclid"/"squared_euclidean".
std::optional<BaselineKind> parse_baseline_kind(std::string_view name);
std::string_view baseline_name(BaselineKind kind);

/// hellinger: sum (sqrt r - sqrt c)^2; chi2: sum (r - c)^2 / (r + c) with 0/0 = 0;
/// total variation: 1/2 sum |r - c|; squared euclidean: sum (r - c)^2.
double baseline_distance(BaselineKind kind, const Histogram& r, const Histogram& c);

/// The alpha = 0 Sinkhorn distance r^T M c.
double independence_kernel_distance(const Histogram& r, const Histogram& c, const CostMatrix& m);

/// Factored form of an EDM for the fast independence kernel:
/// r^T M c = r.u + c.u - 2 (L^T r).(L^T c), with K = L L^T the Gram matrix.
class IndependenceKernelPrecompute {
 public:
  [[nodiscard]] const Vector& norms() const noexcept { return norms_; }
  [[nodiscard]] const Matrix& cholesky_factor() const noexcept { return factor_; }
  [[nodiscard]] double clipped_eigenvalue_mass() const noexcept { return clipped_; }

  // L^T r, cacheable per histogram.
  [[nodiscard]] Vector project(const Histogram& r) const;
  [[nodiscard]] double distance(const Histogram& r, const Histogram& c) const;
  [[nodiscard]] double distance_projected(const Histogram& r, const Vector& lr, const Histogram& c,
                                          const Vector& lc) const;

  // u_i + u_j - 2 (L L^T)_ij.
  [[nodiscard]] Matrix reconstruct() const;

 private:
  friend IndependenceKernelPrecompute independence_precompute(const CostMatrix& m);
  Vector norms_;
  Matrix factor_;  // lower triangular
  double clipped_ = 0.0;
};

/// Recovers the Gram matrix by double centering K = -1/2 J M J, clips small
/// negative eigenvalues and factors K = L L^T with L lower triangular.
/// Throws DomainError when M is not a Euclidean distance matrix.
IndependenceKernelPrecompute independence_precompute(const CostMatrix& m);

struct KernelMatrix {
  Matrix entries;
  double bandwidth_t = 1.0;
  double diagonal_regularizer = 0.0;
};

/// exp(-d_ij / t), shifted on the diagonal when needed so the minimum
/// eigenvalue is at least -1e-10.
KernelMatrix kernel_matrix(const Matrix& distances, double t);

/// {1, q10, q20, q50} with linearly interpolated quantiles.
std::array<double, 4> bandwidth_grid(std::span<const double> sample);

/// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
double quantile(std::span<const double> sample, double p);

}  // namespace sinkdist
