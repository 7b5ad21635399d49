#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sinkdist {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Absolute tolerance on the sum-to-one invariant.
inline constexpr double kMassTolerance = 1e-9;

/// A point of the probability simplex: nonnegative weights summing to one.
///
/// Construction validates the invariants and throws DomainError otherwise.
/// Storage is dense; zero weights are legal and handled by the solvers.
class Histogram {
 public:
  explicit Histogram(Vector weights);

  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] Eigen::Index size() const noexcept { return weights_.size(); }
  [[nodiscard]] double operator[](Eigen::Index i) const { return weights_[i]; }

  // Number of strictly positive weights.
  [[nodiscard]] Eigen::Index support_size() const;

  friend bool operator==(const Histogram& a, const Histogram& b) {
    return a.weights_.size() == b.weights_.size() && a.weights_ == b.weights_;
  }

 private:
  Vector weights_;
};

/// Divides by the total mass. Throws DomainError on negative entries or zero mass.
Histogram normalize(const Vector& raw);
Histogram normalize(std::span<const double> raw);

/// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const Histogram& r);
double entropy(const Vector& weights);

/// Uniform draw from the simplex via normalized exponential spacings.
Histogram sample_simplex(Eigen::Index d, std::uint64_t seed);

/// Row-major flattening of an image followed by normalize.
Histogram image_to_histogram(const Matrix& pixels);

}  // namespace sinkdist
