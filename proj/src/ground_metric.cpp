#include "sinkdist/ground_metric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sinkdist/errors.hpp"

namespace sinkdist {

CostMatrix::CostMatrix(Matrix entries, bool validated_metric)
    : entries_(std::move(entries)), validated_(validated_metric) {
  if (entries_.rows() != entries_.cols()) {
    throw DomainError("cost matrix must be square, got " + std::to_string(entries_.rows()) + "x" +
                      std::to_string(entries_.cols()));
  }
  if (entries_.rows() < 1) throw DomainError("cost matrix must be nonempty");
  if (!entries_.allFinite() || (entries_.array() < 0.0).any()) {
    throw DomainError("cost matrix entries must be finite and nonnegative");
  }
}

MetricReport validate_metric_cone(const Matrix& m, const MetricCheckOptions& opts) {
  if (m.rows() != m.cols()) throw DomainError("validate_metric_cone: matrix is not square");
  const Eigen::Index d = m.rows();
  const double tol = opts.tolerance;
  MetricReport report;
  report.zero_diagonal = (m.diagonal().array().abs() <= tol).all();
  report.symmetric = ((m - m.transpose()).array().abs() <= tol).all();
  report.triangles_checked = d <= opts.triangle_check_limit;

  std::size_t found = 0;
  if (report.triangles_checked) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        const double mij = m(i, j);
        for (Eigen::Index k = 0; k < d; ++k) {
          const double excess = mij - (m(i, k) + m(k, j));
          if (excess > tol) {
            if (report.violations.size() < opts.max_reported) {
              report.violations.push_back({i, j, k, excess});
            }
            ++found;
          }
        }
      }
    }
  }
  report.pass = report.zero_diagonal && report.symmetric && report.triangles_checked && found == 0;
  return report;
}

CostMatrix as_validated_metric(const CostMatrix& m, const MetricCheckOptions& opts) {
  const auto report = validate_metric_cone(m.entries(), opts);
  if (!report.pass) throw DomainError("matrix is not in the metric cone");
  return CostMatrix(m.entries(), true);
}

CostMatrix grid_euclidean_metric(Eigen::Index width, Eigen::Index height) {
  if (width < 1 || height < 1) throw DomainError("grid_euclidean_metric: empty grid");
  const Eigen::Index d = width * height;
  Matrix m(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    const double xa = static_cast<double>(a % width), ya = static_cast<double>(a / width);
    for (Eigen::Index b = 0; b < d; ++b) {
      const double dx = xa - static_cast<double>(b % width);
      const double dy = ya - static_cast<double>(b / width);
      m(a, b) = std::sqrt(dx * dx + dy * dy);
    }
  }
  return CostMatrix(std::move(m), true);
}

CostMatrix power_transform(const CostMatrix& m, double a) {
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("power_transform: exponent must lie in (0, 1]");
  if (a == 1.0) return m;
  Matrix out = m.entries().unaryExpr([a](double x) { return x == 0.0 ? 0.0 : std::pow(x, a); });
  // t -> t^a is concave and vanishes at 0, so it maps metrics to metrics.
  return CostMatrix(std::move(out), m.validated_metric());
}

CostMatrix random_points_metric(Eigen::Index d, std::uint64_t seed) {
  if (d < 2) throw DomainError("random_points_metric: need at least two points");
  const Eigen::Index dim = (d + 9) / 10;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix pts(dim, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) pts(k, j) = gauss(rng);
  }
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double dist = (pts.col(i) - pts.col(j)).norm();
      m(i, j) = dist;
      m(j, i) = dist;
    }
  }
  return CostMatrix(std::move(m), false);
}

double median_of_entries(const Matrix& m) {
  std::vector<double> v(m.data(), m.data() + m.size());
  if (v.empty()) throw DomainError("median of empty matrix");
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

CostMatrix median_normalize(const CostMatrix& m) {
  const double med = median_of_entries(m.entries());
  if (!(med > 0.0)) {
    throw DomainError("median_normalize: median of all entries is zero (diagonal dominates for d=" +
                      std::to_string(m.size()) + ")");
  }
  if (med == 1.0) return m;
  return CostMatrix(m.entries() / med, m.validated_metric());
}

}  // namespace sinkdist
