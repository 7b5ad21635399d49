#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sinkdist/dataset_io.hpp"
#include "sinkdist/ground_metric.hpp"
#include "sinkdist/sinkhorn.hpp"

namespace sinkdist {

/// Deterministic child seed for work item `index` of an experiment seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Stop rule shared by the experiment entry points.
struct StopSettings {
  std::optional<double> tolerance;       // default 0.01 when neither is set
  std::optional<int> fixed_iterations;

  [[nodiscard]] SinkhornConfig config(double lambda) const;
};

struct GapOptions {
  Eigen::Index dim = 100;
  std::size_t pairs = 50;
  std::vector<double> lambdas{1, 2, 5, 9, 20, 50};
  std::uint64_t seed = 1;
  StopSettings stop;
  const LabeledHistogramSet* data = nullptr;  // sample pairs from here instead of the simplex
  Eigen::Index grid_width = 20, grid_height = 20;  // ground metric grid in data mode
};

/// One record per (pair, lambda): value = (d^lambda - d_M) / d_M.
std::vector<ExperimentRecord> run_gap_experiment(const GapOptions& opts);

struct TimingOptions {
  std::vector<Eigen::Index> dims{64, 128, 256, 512};
  std::vector<std::string> methods{"emd", "sinkhorn"};
  std::vector<double> lambdas{1, 9};
  std::size_t trials = 5;
  std::uint64_t seed = 1;
  StopSettings stop;
};

/// Wall time per solve; sinkhorn timing includes building the Gibbs kernel.
std::vector<ExperimentRecord> run_timing_experiment(const TimingOptions& opts);

struct TimingSummary {
  long long dimension;
  std::string method;
  std::optional<double> lambda;
  double mean_ms;
  double median_ms;
  std::size_t trials;
};
std::vector<TimingSummary> summarize_timing(const std::vector<ExperimentRecord>& records);

struct IterationOptions {
  std::vector<Eigen::Index> dims{64, 128, 256};
  std::vector<double> lambdas{1, 5, 9, 20, 50};
  std::size_t trials = 20;
  std::uint64_t seed = 1;
  double tolerance = 0.01;
};

std::vector<ExperimentRecord> run_iterations_experiment(const IterationOptions& opts);

struct KnnOptions {
  std::size_t subset = 500;
  std::size_t folds = 4;
  std::uint64_t seed = 1;
  std::vector<std::string> methods{"sinkhorn", "emd", "hellinger", "tv", "chi2", "sqeuclid", "independence"};
  std::vector<double> lambda_factors{5, 7, 9, 11};  // divided by the median grid distance
  int sinkhorn_iterations = 20;
  double independence_exponent = 1.0;
};

/// Per-fold 1-NN error rates ("knn_fold<k>" rows) followed by "knn_mean" and
/// "knn_std" rows per method. Each fold trains on one part and tests on the rest.
std::vector<ExperimentRecord> run_knn_eval(const LabeledHistogramSet& data, Eigen::Index grid_width,
                                           Eigen::Index grid_height, const KnnOptions& opts);

/// Class-conditional blob images on a width x height grid, a stand-in for
/// digit images when no IDX files are available.
LabeledHistogramSet synthetic_digits(std::size_t count, Eigen::Index width, Eigen::Index height, int classes,
                                     std::uint64_t seed);

struct PairwiseOptions {
  Eigen::Index dim = 100;
  std::size_t count = 100;
  std::string method = "sinkhorn";
  double lambda = 9.0;
  std::uint64_t seed = 1;
  StopSettings stop;
  double independence_exponent = 1.0;
  const LabeledHistogramSet* data = nullptr;
  Eigen::Index grid_width = 20, grid_height = 20;
};

/// Distances from the first histogram to each of the others.
std::vector<ExperimentRecord> run_pairwise(const PairwiseOptions& opts);

/// Dense pairwise distance matrix for one method name ("sinkhorn", "emd",
/// "independence" or a baseline).
Matrix distance_matrix(const std::vector<Histogram>& hs, const CostMatrix& m, const std::string& method,
                       const SinkhornConfig& cfg, double independence_exponent = 1.0);

bool is_known_method(const std::string& method);

}  // namespace sinkdist
