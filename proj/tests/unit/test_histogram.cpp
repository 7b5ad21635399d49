#include <cmath>
#include <vector>

#include "doctest.h"
#include "sinkdist/errors.hpp"
#include "sinkdist/histogram.hpp"

using namespace sinkdist;

TEST_SUITE("histograms") {
  TEST_CASE("normalize divides by the total mass") {
    CHECK(normalize(Vector{{2.0, 2.0}}).weights() == Vector{{0.5, 0.5}});
    CHECK(normalize(Vector{{0.0, 5.0}}).weights() == Vector{{0.0, 1.0}});
    const std::vector<double> raw{1.0, 3.0};
    CHECK(normalize(std::span<const double>(raw)).weights() == Vector{{0.25, 0.75}});
  }

  TEST_CASE("normalize rejects empty or negative mass") {
    CHECK_THROWS_AS(normalize(Vector{{0.0, 0.0}}), DomainError);
    CHECK_THROWS_AS(normalize(Vector{{1.0, -0.5}}), DomainError);
    CHECK_THROWS_AS(normalize(Vector{{1.0, NAN}}), DomainError);
  }

  TEST_CASE("normalize is idempotent") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Histogram h = sample_simplex(17, seed);
      CHECK(normalize(h.weights()) == h);
    }
  }

  TEST_CASE("constructor validates the simplex invariants") {
    CHECK_THROWS_AS(Histogram(Vector{{0.5, 0.6}}), DomainError);
    CHECK_THROWS_AS(Histogram(Vector(0)), DomainError);
    CHECK_THROWS_AS(Histogram(Vector{{1.5, -0.5}}), DomainError);
    CHECK_NOTHROW(Histogram(Vector{{0.5, 0.5 + 5e-10}}));
    CHECK(Histogram(Vector{{0.0, 0.3, 0.7}}).support_size() == 2);
  }

  TEST_CASE("entropy of simple histograms") {
    CHECK(entropy(Histogram(Vector{{0.5, 0.5}})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(entropy(Histogram(Vector{{1.0, 0.0}})) == 0.0);
    CHECK(entropy(Histogram(Vector::Constant(4, 0.25))) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }

  TEST_CASE("entropy lies in [0, log d]") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const Eigen::Index d = 2 + static_cast<Eigen::Index>(seed % 30);
      const double h = entropy(sample_simplex(d, seed));
      CHECK(h >= 0.0);
      CHECK(h <= std::log(static_cast<double>(d)) + 1e-12);
    }
  }

  TEST_CASE("sample_simplex edge cases") {
    CHECK(sample_simplex(1, 7).weights() == Vector{{1.0}});
    CHECK_THROWS_AS(sample_simplex(0, 7), DomainError);
    const Histogram big = sample_simplex(1000, 3);
    CHECK(std::abs(big.weights().sum() - 1.0) <= 1e-12);
    CHECK(sample_simplex(40, 11) == sample_simplex(40, 11));
    CHECK_FALSE(sample_simplex(40, 11) == sample_simplex(40, 12));
  }

  TEST_CASE("sample_simplex mean at d=3 is uniform") {
    Vector mean = Vector::Zero(3);
    const int draws = 100000;
    for (int s = 0; s < draws; ++s) mean += sample_simplex(3, static_cast<std::uint64_t>(s)).weights();
    mean /= draws;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - 1.0 / 3.0) <= 0.01);
  }

  TEST_CASE("image_to_histogram flattens row-major") {
    const Histogram flat = image_to_histogram(Matrix::Constant(20, 20, 3.0));
    CHECK(flat.size() == 400);
    CHECK((flat.weights().array() - 1.0 / 400.0).abs().maxCoeff() <= 1e-15);

    Matrix spot = Matrix::Zero(3, 4);
    spot(1, 2) = 200.0;
    const Histogram point = image_to_histogram(spot);
    CHECK(point[1 * 4 + 2] == 1.0);
    CHECK(point.support_size() == 1);

    CHECK_THROWS_AS(image_to_histogram(Matrix::Zero(2, 2)), DomainError);
  }
}
