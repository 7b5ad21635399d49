#pragma once

#include <cstdint>
#include <vector>

#include "sinkdist/histogram.hpp"

namespace sinkdist {

/// Ground cost matrix. Square with nonnegative entries; `validated_metric()`
/// records whether the matrix passed validate_metric_cone.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix entries, bool validated_metric = false);

  [[nodiscard]] const Matrix& entries() const noexcept { return entries_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return entries_.rows(); }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  [[nodiscard]] bool validated_metric() const noexcept { return validated_; }

 private:
  Matrix entries_;
  bool validated_ = false;
};

struct TriangleViolation {
  Eigen::Index i, j, k;  // m_ij > m_ik + m_kj
  double excess;
};

struct MetricReport {
  bool pass = false;
  bool zero_diagonal = false;
  bool symmetric = false;
  bool triangles_checked = false;
  std::vector<TriangleViolation> violations;  // capped at max_reported
};

struct MetricCheckOptions {
  double tolerance = 1e-9;
  std::size_t max_reported = 16;
  // Matrices larger than this skip the O(d^3) triangle scan.
  Eigen::Index triangle_check_limit = 2048;
};

MetricReport validate_metric_cone(const Matrix& m, const MetricCheckOptions& opts = {});

/// Returns a copy of `m` flagged as validated, or throws DomainError if the
/// metric cone check fails.
CostMatrix as_validated_metric(const CostMatrix& m, const MetricCheckOptions& opts = {});

/// Euclidean distances between pixel centres of a width x height grid, pixels
/// in row-major order (index = y * width + x).
CostMatrix grid_euclidean_metric(Eigen::Index width, Eigen::Index height);

/// Entrywise m^a for a in (0, 1].
CostMatrix power_transform(const CostMatrix& m, double a);

/// Pairwise Euclidean distances of d standard Gaussian points in dimension ceil(d/10).
CostMatrix random_points_metric(Eigen::Index d, std::uint64_t seed);

/// Divides by the median of all d^2 entries, diagonal zeros included.
CostMatrix median_normalize(const CostMatrix& m);

/// Median of all entries (mean of the two central order statistics for even counts).
double median_of_entries(const Matrix& m);

}  // namespace sinkdist
