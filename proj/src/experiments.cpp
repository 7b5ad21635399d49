#include "sinkdist/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "sinkdist/emd.hpp"
#include "sinkdist/errors.hpp"
#include "sinkdist/kernels.hpp"

namespace sinkdist {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class T>
double mean_of(const std::vector<T>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Matrix as_columns(const std::vector<Histogram>& hs) {
  Matrix out(hs.front().size(), static_cast<Eigen::Index>(hs.size()));
  for (std::size_t j = 0; j < hs.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = hs[j].weights();
  return out;
}

// Index of the training point closest to `row` under `dist`.
std::size_t nearest(const Matrix& dist, std::size_t row, const std::vector<std::size_t>& train) {
  std::size_t best = train.front();
  double best_d = dist(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(best));
  for (std::size_t t : train) {
    const double dd = dist(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(t));
    if (dd < best_d) {
      best_d = dd;
      best = t;
    }
  }
  return best;
}

double nn_error(const Matrix& dist, const std::vector<int>& labels, const std::vector<std::size_t>& test,
                const std::vector<std::size_t>& train) {
  if (test.empty()) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t q : test) {
    if (labels[nearest(dist, q, train)] != labels[q]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 of the combined state
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SinkhornConfig StopSettings::config(double lambda) const {
  if (fixed_iterations) return SinkhornConfig::fixed(lambda, *fixed_iterations);
  return SinkhornConfig::with_tolerance(lambda, tolerance.value_or(0.01));
}

bool is_known_method(const std::string& method) {
  return method == "sinkhorn" || method == "emd" || method == "independence" || parse_baseline_kind(method).has_value();
}

std::vector<ExperimentRecord> run_gap_experiment(const GapOptions& opts) {
  if (opts.lambdas.empty()) throw DomainError("gap: lambda list is empty");
  if (!std::is_sorted(opts.lambdas.begin(), opts.lambdas.end())) throw DomainError("gap: lambdas must be ascending");

  std::optional<CostMatrix> metric;
  Eigen::Index dim = opts.dim;
  if (opts.data) {
    if (opts.data->histograms.size() < 2) throw DomainError("gap: need at least two ingested histograms");
    metric = grid_euclidean_metric(opts.grid_width, opts.grid_height);
    dim = metric->size();
  } else {
    metric = median_normalize(random_points_metric(dim, derive_seed(opts.seed, 0)));
  }

  std::vector<ExperimentRecord> out;
  out.reserve(opts.pairs * opts.lambdas.size());
  for (std::size_t p = 0; p < opts.pairs; ++p) {
    const std::uint64_t pair_seed = derive_seed(opts.seed, p + 1);
    std::optional<Histogram> r, c;
    if (opts.data) {
      std::mt19937_64 rng(pair_seed);
      const auto n = opts.data->histograms.size();
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const std::size_t a = pick(rng);
      std::size_t b = pick(rng);
      while (b == a) b = pick(rng);
      r = opts.data->histograms[a];
      c = opts.data->histograms[b];
    } else {
      r = sample_simplex(dim, derive_seed(pair_seed, 1));
      c = sample_simplex(dim, derive_seed(pair_seed, 2));
    }
    const double exact = solve_emd(*r, *c, *metric).cost;
    for (double lambda : opts.lambdas) {
      const auto start = Clock::now();
      const auto res = sinkhorn_divergence(*r, *c, *metric, opts.stop.config(lambda));
      const double ms = elapsed_ms(start);
      const double gap = exact > 0.0 ? (res.divergence - exact) / exact : res.divergence;
      out.push_back({"gap", dim, lambda, "sinkhorn", pair_seed, gap, ms, res.iterations});
    }
  }
  return out;
}

std::vector<ExperimentRecord> run_timing_experiment(const TimingOptions& opts) {
  for (const auto& m : opts.methods) {
    if (m != "emd" && m != "sinkhorn") throw DomainError("bench: unknown method '" + m + "'");
  }
  const bool want_sinkhorn = std::find(opts.methods.begin(), opts.methods.end(), "sinkhorn") != opts.methods.end();
  if (want_sinkhorn && opts.lambdas.empty()) throw DomainError("bench: sinkhorn needs at least one lambda");

  std::vector<ExperimentRecord> out;
  for (std::size_t di = 0; di < opts.dims.size(); ++di) {
    const Eigen::Index d = opts.dims[di];
    if (d < 10) throw DomainError("bench: dimensions must be at least 10");
    const CostMatrix metric = median_normalize(random_points_metric(d, derive_seed(opts.seed, di)));
    std::vector<std::pair<Histogram, Histogram>> pairs;
    std::vector<std::uint64_t> seeds;
    for (std::size_t t = 0; t < opts.trials; ++t) {
      const std::uint64_t s = derive_seed(derive_seed(opts.seed, di), t + 1);
      seeds.push_back(s);
      pairs.emplace_back(sample_simplex(d, derive_seed(s, 1)), sample_simplex(d, derive_seed(s, 2)));
    }
    const Histogram warm_r = sample_simplex(d, derive_seed(opts.seed, 1000 + di));
    const Histogram warm_c = sample_simplex(d, derive_seed(opts.seed, 2000 + di));

    for (const auto& method : opts.methods) {
      if (method == "emd") {
        (void)solve_emd(warm_r, warm_c, metric);
        for (std::size_t t = 0; t < opts.trials; ++t) {
          const auto start = Clock::now();
          const auto sol = solve_emd(pairs[t].first, pairs[t].second, metric);
          const double ms = elapsed_ms(start);
          out.push_back({"bench", d, std::nullopt, "emd", seeds[t], sol.cost, ms, std::nullopt});
        }
      } else {
        for (double lambda : opts.lambdas) {
          const auto cfg = opts.stop.config(lambda);
          (void)sinkhorn_divergence(warm_r, warm_c, metric, cfg);
          for (std::size_t t = 0; t < opts.trials; ++t) {
            const auto start = Clock::now();
            const auto res = sinkhorn_divergence(pairs[t].first, pairs[t].second, metric, cfg);
            const double ms = elapsed_ms(start);
            out.push_back({"bench", d, lambda, "sinkhorn", seeds[t], res.divergence, ms, res.iterations});
          }
        }
      }
    }
  }
  return out;
}

std::vector<TimingSummary> summarize_timing(const std::vector<ExperimentRecord>& records) {
  using Key = std::tuple<long long, std::string, double>;
  std::map<Key, std::vector<double>> groups;
  std::vector<Key> order;
  for (const auto& rec : records) {
    Key key{rec.dimension, rec.method, rec.lambda.value_or(-1.0)};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(rec.wall_time_ms);
  }
  std::vector<TimingSummary> out;
  for (const auto& key : order) {
    const auto& times = groups[key];
    const double lambda = std::get<2>(key);
    out.push_back({std::get<0>(key), std::get<1>(key), lambda < 0 ? std::nullopt : std::optional<double>(lambda),
                   mean_of(times), median_of(times), times.size()});
  }
  return out;
}

std::vector<ExperimentRecord> run_iterations_experiment(const IterationOptions& opts) {
  if (opts.lambdas.empty()) throw DomainError("iters: lambda list is empty");
  std::vector<ExperimentRecord> out;
  for (std::size_t di = 0; di < opts.dims.size(); ++di) {
    const Eigen::Index d = opts.dims[di];
    if (d < 10) throw DomainError("iters: dimensions must be at least 10");
    const CostMatrix metric = median_normalize(random_points_metric(d, derive_seed(opts.seed, di)));
    for (std::size_t t = 0; t < opts.trials; ++t) {
      const std::uint64_t s = derive_seed(derive_seed(opts.seed, di), t + 1);
      const Histogram r = sample_simplex(d, derive_seed(s, 1));
      const Histogram c = sample_simplex(d, derive_seed(s, 2));
      for (double lambda : opts.lambdas) {
        const auto start = Clock::now();
        const auto res = sinkhorn_divergence(r, c, metric, SinkhornConfig::with_tolerance(lambda, opts.tolerance));
        const double ms = elapsed_ms(start);
        out.push_back({"iters", d, lambda, "sinkhorn", s, res.divergence, ms, res.iterations});
      }
    }
  }
  return out;
}

Matrix distance_matrix(const std::vector<Histogram>& hs, const CostMatrix& m, const std::string& method,
                       const SinkhornConfig& cfg, double independence_exponent) {
  const auto n = static_cast<Eigen::Index>(hs.size());
  Matrix dist = Matrix::Zero(n, n);
  if (method == "sinkhorn") {
    const Matrix targets = as_columns(hs);
    for (Eigen::Index i = 0; i < n; ++i) {
      const GibbsKernel k(m, cfg.lambda, hs[static_cast<std::size_t>(i)]);
      const auto results = sinkhorn_batch(k, targets, cfg);
      for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = results[static_cast<std::size_t>(j)].divergence;
    }
    return dist;
  }
  if (method == "independence") {
    const CostMatrix powered = power_transform(m, independence_exponent);
    const Matrix targets = as_columns(hs);
    dist = targets.transpose() * powered.entries() * targets;
    return dist;
  }
  const auto kind = parse_baseline_kind(method);
  if (method != "emd" && !kind) throw DomainError("unknown distance method '" + method + "'");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& a = hs[static_cast<std::size_t>(i)];
      const auto& b = hs[static_cast<std::size_t>(j)];
      const double v = kind ? baseline_distance(*kind, a, b) : solve_emd(a, b, m).cost;
      dist(i, j) = v;
      dist(j, i) = v;
    }
  }
  return dist;
}

std::vector<ExperimentRecord> run_knn_eval(const LabeledHistogramSet& data, Eigen::Index grid_width,
                                           Eigen::Index grid_height, const KnnOptions& opts) {
  if (opts.folds < 2) throw DomainError("knn: need at least two folds");
  if (opts.subset > data.histograms.size()) {
    throw DomainError("knn: subset of " + std::to_string(opts.subset) + " exceeds the " +
                      std::to_string(data.histograms.size()) + " available histograms");
  }
  if (opts.subset < 2 * opts.folds) throw DomainError("knn: subset too small for the fold count");
  for (const auto& m : opts.methods) {
    if (!is_known_method(m)) throw DomainError("knn: unknown method '" + m + "'");
  }

  // Seeded subset, then seeded fold assignment.
  std::mt19937_64 rng(derive_seed(opts.seed, 0));
  std::vector<std::size_t> pool(data.histograms.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(opts.subset);
  std::vector<Histogram> hs;
  std::vector<int> labels;
  for (std::size_t idx : pool) {
    hs.push_back(data.histograms[idx]);
    labels.push_back(data.labels[idx]);
  }
  const CostMatrix metric = grid_euclidean_metric(grid_width, grid_height);
  if (metric.size() != hs.front().size()) throw DomainError("knn: grid does not match histogram dimension");
  const double q50 = median_of_entries(metric.entries());

  std::vector<std::vector<std::size_t>> parts(opts.folds);
  for (std::size_t k = 0; k < hs.size(); ++k) parts[k * opts.folds / hs.size()].push_back(k);

  const auto d = static_cast<long long>(metric.size());
  std::vector<ExperimentRecord> fold_rows, summary_rows;
  for (const auto& method : opts.methods) {
    const auto start = Clock::now();
    std::vector<double> errors;
    std::vector<std::optional<double>> chosen(opts.folds);
    if (method == "sinkhorn") {
      std::vector<Matrix> per_lambda;
      std::vector<double> lambdas;
      for (double f : opts.lambda_factors) {
        lambdas.push_back(f / q50);
        per_lambda.push_back(distance_matrix(hs, metric, method, SinkhornConfig::fixed(lambdas.back(), opts.sinkhorn_iterations)));
      }
      for (std::size_t f = 0; f < opts.folds; ++f) {
        const auto& train = parts[f];
        // Model selection on a held-out half of the training part.
        const std::vector<std::size_t> fit(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(train.size() / 2));
        const std::vector<std::size_t> held(train.begin() + static_cast<std::ptrdiff_t>(train.size() / 2), train.end());
        std::size_t best = 0;
        double best_err = 2.0;
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
          const double e = nn_error(per_lambda[l], labels, held, fit);
          if (e < best_err) {
            best_err = e;
            best = l;
          }
        }
        chosen[f] = lambdas[best];
        std::vector<std::size_t> test;
        for (std::size_t g = 0; g < opts.folds; ++g) {
          if (g != f) test.insert(test.end(), parts[g].begin(), parts[g].end());
        }
        errors.push_back(nn_error(per_lambda[best], labels, test, train));
      }
    } else {
      const Matrix dist =
          distance_matrix(hs, metric, method, SinkhornConfig::fixed(1.0, 1), opts.independence_exponent);
      for (std::size_t f = 0; f < opts.folds; ++f) {
        std::vector<std::size_t> test;
        for (std::size_t g = 0; g < opts.folds; ++g) {
          if (g != f) test.insert(test.end(), parts[g].begin(), parts[g].end());
        }
        errors.push_back(nn_error(dist, labels, test, parts[f]));
      }
    }
    const double ms = elapsed_ms(start);
    for (std::size_t f = 0; f < opts.folds; ++f) {
      fold_rows.push_back({"knn_fold" + std::to_string(f), d, chosen[f], method, opts.seed, errors[f], 0.0, std::nullopt});
    }
    summary_rows.push_back({"knn_mean", d, std::nullopt, method, opts.seed, mean_of(errors), ms, std::nullopt});
    summary_rows.push_back({"knn_std", d, std::nullopt, method, opts.seed, stddev_of(errors), ms, std::nullopt});
  }
  fold_rows.insert(fold_rows.end(), summary_rows.begin(), summary_rows.end());
  return fold_rows;
}

LabeledHistogramSet synthetic_digits(std::size_t count, Eigen::Index width, Eigen::Index height, int classes,
                                     std::uint64_t seed) {
  if (classes < 1 || count == 0) throw DomainError("synthetic_digits: need classes and samples");
  constexpr int kBlobs = 3;
  std::mt19937_64 rng(derive_seed(seed, 7));
  std::uniform_real_distribution<double> ux(2.0, static_cast<double>(width) - 3.0);
  std::uniform_real_distribution<double> uy(2.0, static_cast<double>(height) - 3.0);
  std::vector<std::array<std::pair<double, double>, kBlobs>> templates(static_cast<std::size_t>(classes));
  for (auto& t : templates) {
    for (auto& b : t) b = {ux(rng), uy(rng)};
  }

  std::uniform_int_distribution<int> label_dist(0, classes - 1);
  std::uniform_real_distribution<double> shift(-2.0, 2.0), jitter(-0.8, 0.8), gain(0.6, 1.0);
  LabeledHistogramSet out;
  out.source = "synthetic";
  out.num_classes = classes;
  while (out.histograms.size() < count) {
    const int label = label_dist(rng);
    const double sx = shift(rng), sy = shift(rng);
    Matrix img = Matrix::Zero(height, width);
    for (const auto& [bx, by] : templates[static_cast<std::size_t>(label)]) {
      const double cx = bx + sx + jitter(rng), cy = by + sy + jitter(rng), g = gain(rng);
      for (Eigen::Index y = 0; y < height; ++y) {
        for (Eigen::Index x = 0; x < width; ++x) {
          const double r2 = (static_cast<double>(x) - cx) * (static_cast<double>(x) - cx) +
                            (static_cast<double>(y) - cy) * (static_cast<double>(y) - cy);
          img(y, x) += 255.0 * g * std::exp(-r2 / 2.0);
        }
      }
    }
    // Byte-valued and sparse like scanned digits.
    img = img.unaryExpr([](double v) { return v < 20.0 ? 0.0 : std::min(std::round(v), 255.0); });
    if (!(img.array() > 0.0).any()) continue;
    out.histograms.push_back(image_to_histogram(img));
    out.labels.push_back(label);
  }
  return out;
}

std::vector<ExperimentRecord> run_pairwise(const PairwiseOptions& opts) {
  if (!is_known_method(opts.method)) throw DomainError("pairwise: unknown method '" + opts.method + "'");
  std::vector<Histogram> hs;
  std::optional<CostMatrix> metric;
  if (opts.data) {
    if (opts.data->histograms.size() < 2) throw DomainError("pairwise: need at least two histograms");
    const std::size_t n = std::min(opts.count + 1, opts.data->histograms.size());
    hs.assign(opts.data->histograms.begin(), opts.data->histograms.begin() + static_cast<std::ptrdiff_t>(n));
    metric = grid_euclidean_metric(opts.grid_width, opts.grid_height);
  } else {
    for (std::size_t k = 0; k <= opts.count; ++k) hs.push_back(sample_simplex(opts.dim, derive_seed(opts.seed, k + 1)));
    metric = median_normalize(random_points_metric(opts.dim, derive_seed(opts.seed, 0)));
  }
  const Histogram& source = hs.front();
  const auto d = static_cast<long long>(metric->size());
  std::vector<ExperimentRecord> out;
  if (opts.method == "sinkhorn") {
    const auto cfg = opts.stop.config(opts.lambda);
    std::vector<Histogram> rest(hs.begin() + 1, hs.end());
    const auto start = Clock::now();
    const auto results = sinkhorn_batch(source, as_columns(rest), *metric, cfg);
    const double ms = elapsed_ms(start);
    for (std::size_t k = 0; k < results.size(); ++k) {
      out.push_back({"pairwise", d, opts.lambda, "sinkhorn", static_cast<std::uint64_t>(k + 1), results[k].divergence,
                     ms, results[k].iterations});
    }
    return out;
  }
  const auto kind = parse_baseline_kind(opts.method);
  const CostMatrix powered = opts.method == "independence" ? power_transform(*metric, opts.independence_exponent) : *metric;
  for (std::size_t k = 1; k < hs.size(); ++k) {
    const auto start = Clock::now();
    double v = 0.0;
    if (opts.method == "emd") {
      v = solve_emd(source, hs[k], *metric).cost;
    } else if (opts.method == "independence") {
      v = independence_kernel_distance(source, hs[k], powered);
    } else {
      v = baseline_distance(*kind, source, hs[k]);
    }
    out.push_back({"pairwise", d, std::nullopt, opts.method, static_cast<std::uint64_t>(k), v, elapsed_ms(start),
                   std::nullopt});
  }
  return out;
}

}  // namespace sinkdist
