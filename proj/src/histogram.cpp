#include "sinkdist/histogram.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

// Inputs already this close to unit mass are returned untouched, which makes
// normalize exactly idempotent despite rounding in the division.
constexpr double kAlreadyNormalized = 1e-14;

}  // namespace

Histogram::Histogram(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() < 1) throw DomainError("histogram must have at least one bin");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("histogram weight " + std::to_string(i) + " is negative or not finite");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) {
    throw DomainError("histogram weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

Eigen::Index Histogram::support_size() const {
  return (weights_.array() > 0.0).count();
}

Histogram normalize(const Vector& raw) {
  if (raw.size() == 0) throw DomainError("normalize: empty vector");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0) || !std::isfinite(raw[i])) {
      throw DomainError("normalize: entry " + std::to_string(i) + " is negative or not finite");
    }
    sum += raw[i];
  }
  if (sum <= 0.0) throw DomainError("normalize: total mass is zero");
  if (std::abs(sum - 1.0) <= kAlreadyNormalized) return Histogram(raw);
  return Histogram(raw / sum);
}

Histogram normalize(std::span<const double> raw) {
  return normalize(Vector(Eigen::Map<const Vector>(raw.data(), static_cast<Eigen::Index>(raw.size()))));
}

double entropy(const Vector& weights) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

double entropy(const Histogram& r) { return entropy(r.weights()); }

Histogram sample_simplex(Eigen::Index d, std::uint64_t seed) {
  if (d < 1) throw DomainError("sample_simplex: dimension must be positive");
  if (d == 1) return Histogram(Vector::Ones(1));
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  Vector w(d);
  for (Eigen::Index i = 0; i < d; ++i) w[i] = expo(rng);
  return Histogram(w / w.sum());
}

Histogram image_to_histogram(const Matrix& pixels) {
  if (pixels.size() == 0) throw DomainError("image_to_histogram: empty image");
  Vector flat(pixels.size());
  Eigen::Index k = 0;
  for (Eigen::Index y = 0; y < pixels.rows(); ++y) {
    for (Eigen::Index x = 0; x < pixels.cols(); ++x) flat[k++] = pixels(y, x);
  }
  return normalize(flat);
}

}  // namespace sinkdist
