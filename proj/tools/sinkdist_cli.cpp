// Benchmark and reproduction harness. Every subcommand writes CSV rows with
// the schema experiment,dimension,lambda,method,seed,value,wall_time_ms,iterations.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sinkdist/dataset_io.hpp"
#include "sinkdist/errors.hpp"
#include "sinkdist/experiments.hpp"

namespace fs = std::filesystem;
using namespace sinkdist;

namespace {

struct CommonFlags {
  std::uint64_t seed = 1;
  std::string out;
  bool synthetic = false;
  std::optional<double> tolerance;
  std::optional<int> fixed_iters;
  std::string images, labels;
  int crop = 20;

  [[nodiscard]] StopSettings stop() const { return {tolerance, fixed_iters}; }
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_data) {
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--out", f.out, "CSV output path (stdout when omitted)");
  cmd->add_flag("--synthetic", f.synthetic, "Use generated data instead of IDX files");
  cmd->add_option("--tolerance", f.tolerance, "Sinkhorn stop tolerance on the change of x")->check(CLI::PositiveNumber);
  cmd->add_option("--fixed-iters", f.fixed_iters, "Run a fixed number of Sinkhorn iterations")->check(CLI::PositiveNumber);
  if (with_data) {
    cmd->add_option("--images", f.images, "IDX image file");
    cmd->add_option("--labels", f.labels, "IDX label file");
    cmd->add_option("--crop", f.crop, "Center crop size for ingested images (0 = native size)")->check(CLI::NonNegativeNumber);
  }
}

void emit(const std::vector<ExperimentRecord>& records, const std::string& out) {
  if (out.empty()) {
    std::cout << kCsvHeader << '\n';
    for (const auto& r : records) std::cout << format_record(r) << '\n';
  } else {
    write_results_csv(records, out);
    std::cerr << "wrote " << records.size() << " records to " << out << '\n';
  }
}

// Ingested data when --images/--labels are given; nullopt means sample from the simplex.
std::optional<LabeledHistogramSet> load_data(const CommonFlags& f, Eigen::Index& width, Eigen::Index& height) {
  if (f.synthetic || f.images.empty()) return std::nullopt;
  if (f.labels.empty()) throw CLI::ValidationError("--labels", "required together with --images");
  LoadOptions lo;
  if (f.crop > 0) lo.crop = f.crop;
  auto set = load_labeled_histograms(f.images, f.labels, lo);
  if (set.skipped_empty) std::cerr << "warning: skipped " << set.skipped_empty << " all-zero images\n";
  const auto first = read_idx_images(f.images);
  width = f.crop > 0 ? f.crop : first.front().cols();
  height = f.crop > 0 ? f.crop : first.front().rows();
  return set;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic optimal transport distances: experiments and benchmarks"};
  app.require_subcommand(1);

  CommonFlags gap_flags;
  std::vector<double> gap_lambdas{1, 2, 5, 9, 20, 50};
  GapOptions gap;
  auto* gap_cmd = app.add_subcommand("gap", "Relative gap between the Sinkhorn divergence and the exact EMD");
  add_common(gap_cmd, gap_flags, true);
  gap_cmd->add_option("--dim", gap.dim, "Histogram dimension (simplex sampling)")->check(CLI::Range(2, 1 << 20));
  gap_cmd->add_option("--pairs", gap.pairs, "Number of histogram pairs");
  gap_cmd->add_option("--lambdas", gap_lambdas, "Ascending lambda list")->delimiter(',');

  CommonFlags bench_flags;
  TimingOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Wall time of exact EMD versus Sinkhorn");
  add_common(bench_cmd, bench_flags, false);
  bench_cmd->add_option("--dims", bench.dims, "Dimensions")->delimiter(',');
  bench_cmd->add_option("--methods", bench.methods, "Subset of emd,sinkhorn")->delimiter(',');
  bench_cmd->add_option("--lambdas", bench.lambdas, "Sinkhorn lambdas")->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "Pairs per dimension");

  CommonFlags iters_flags;
  IterationOptions iters;
  auto* iters_cmd = app.add_subcommand("iters", "Iterations to reach the stop tolerance");
  add_common(iters_cmd, iters_flags, false);
  iters_cmd->add_option("--dims", iters.dims, "Dimensions")->delimiter(',');
  iters_cmd->add_option("--lambdas", iters.lambdas, "Lambdas")->delimiter(',');
  iters_cmd->add_option("--trials", iters.trials, "Pairs per dimension");

  CommonFlags knn_flags;
  KnnOptions knn;
  std::size_t synthetic_count = 0;
  auto* knn_cmd = app.add_subcommand("knn", "1-nearest-neighbour error of each distance on labeled images");
  add_common(knn_cmd, knn_flags, true);
  knn_cmd->add_option("--subset", knn.subset, "Number of images used");
  knn_cmd->add_option("--folds", knn.folds, "Folds (one part trains, the rest test)");
  knn_cmd->add_option("--methods", knn.methods, "Distances to evaluate")->delimiter(',');
  knn_cmd->add_option("--lambda-factors", knn.lambda_factors, "Lambda grid, divided by the median grid distance")
      ->delimiter(',');
  knn_cmd->add_option("--exponent", knn.independence_exponent, "Power a applied to M for the independence kernel")
      ->check(CLI::Range(1e-12, 1.0));
  knn_cmd->add_option("--synthetic-count", synthetic_count, "Images to generate with --synthetic (default: subset)");

  CommonFlags pair_flags;
  PairwiseOptions pairwise;
  auto* pair_cmd = app.add_subcommand("pairwise", "Distances from one histogram to many");
  add_common(pair_cmd, pair_flags, true);
  pair_cmd->add_option("--dim", pairwise.dim, "Histogram dimension (simplex sampling)")->check(CLI::Range(2, 1 << 20));
  pair_cmd->add_option("--count", pairwise.count, "Number of target histograms");
  pair_cmd->add_option("--method", pairwise.method, "sinkhorn, emd, independence, hellinger, chi2, tv, sqeuclid");
  pair_cmd->add_option("--lambda", pairwise.lambda, "Sinkhorn lambda")->check(CLI::PositiveNumber);
  pair_cmd->add_option("--exponent", pairwise.independence_exponent, "Power a for the independence kernel")
      ->check(CLI::Range(1e-12, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gap_cmd->parsed()) {
      gap.lambdas = gap_lambdas;
      gap.seed = gap_flags.seed;
      gap.stop = gap_flags.stop();
      Eigen::Index w = 20, h = 20;
      auto data = load_data(gap_flags, w, h);
      if (data) {
        gap.data = &*data;
        gap.grid_width = w;
        gap.grid_height = h;
      }
      if (gap.lambdas.empty()) {
        std::cerr << "gap: --lambdas must not be empty\n";
        return 2;
      }
      emit(run_gap_experiment(gap), gap_flags.out);
    } else if (bench_cmd->parsed()) {
      bench.seed = bench_flags.seed;
      bench.stop = bench_flags.stop();
      for (const auto& m : bench.methods) {
        if (m != "emd" && m != "sinkhorn") {
          std::cerr << "bench: unknown method '" << m << "'\n";
          return 2;
        }
      }
      const auto records = run_timing_experiment(bench);
      for (const auto& s : summarize_timing(records)) {
        std::fprintf(stderr, "d=%lld %-8s lambda=%-6s mean %.3f ms  median %.3f ms  (%zu trials)\n", s.dimension,
                     s.method.c_str(), s.lambda ? std::to_string(*s.lambda).substr(0, 6).c_str() : "-", s.mean_ms,
                     s.median_ms, s.trials);
      }
      emit(records, bench_flags.out);
    } else if (iters_cmd->parsed()) {
      iters.seed = iters_flags.seed;
      if (iters_flags.tolerance) iters.tolerance = *iters_flags.tolerance;
      emit(run_iterations_experiment(iters), iters_flags.out);
    } else if (knn_cmd->parsed()) {
      knn.seed = knn_flags.seed;
      if (knn_flags.fixed_iters) knn.sinkhorn_iterations = *knn_flags.fixed_iters;
      for (const auto& m : knn.methods) {
        if (!is_known_method(m)) {
          std::cerr << "knn: unknown method '" << m << "'\n";
          return 2;
        }
      }
      Eigen::Index w = 20, h = 20;
      auto data = load_data(knn_flags, w, h);
      if (!data) {
        if (!knn_flags.synthetic) {
          std::cerr << "knn: pass --images/--labels or --synthetic\n";
          return 2;
        }
        data = synthetic_digits(synthetic_count ? synthetic_count : knn.subset, 20, 20, 10, knn.seed);
      }
      emit(run_knn_eval(*data, w, h, knn), knn_flags.out);
    } else if (pair_cmd->parsed()) {
      pairwise.seed = pair_flags.seed;
      pairwise.stop = pair_flags.stop();
      if (!is_known_method(pairwise.method)) {
        std::cerr << "pairwise: unknown method '" << pairwise.method << "'\n";
        return 2;
      }
      Eigen::Index w = 20, h = 20;
      auto data = load_data(pair_flags, w, h);
      if (data) {
        pairwise.data = &*data;
        pairwise.grid_width = w;
        pairwise.grid_height = h;
      }
      emit(run_pairwise(pairwise), pair_flags.out);
    }
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
