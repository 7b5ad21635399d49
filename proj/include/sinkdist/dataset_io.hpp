#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sinkdist/histogram.hpp"

namespace sinkdist {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Images of an IDX3 file as rows x cols intensity grids (unsigned bytes widened to double).
std::vector<Matrix> read_idx_images(const std::filesystem::path& path);
std::vector<int> read_idx_labels(const std::filesystem::path& path);

// Writers produce the same layout the readers accept. Pixel values are rounded
// and must lie in [0, 255].
void write_idx_images(const std::vector<Matrix>& images, const std::filesystem::path& path);
void write_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// Central rows x cols window of an image.
Matrix center_crop(const Matrix& image, Eigen::Index rows, Eigen::Index cols);

struct LabeledHistogramSet {
  std::vector<Histogram> histograms;
  std::vector<int> labels;
  std::string source;
  std::size_t skipped_empty = 0;  // all-zero images that could not be normalized
  int num_classes = 10;
};

struct LoadOptions {
  std::size_t limit = 0;  // 0 = all
  std::optional<Eigen::Index> crop;  // square center crop, e.g. 20 for the 20x20 grid
};

LabeledHistogramSet load_labeled_histograms(const std::filesystem::path& images, const std::filesystem::path& labels,
                                            const LoadOptions& opts = {});

/// One CSV row of an experiment. Optional fields are written empty.
struct ExperimentRecord {
  std::string experiment;
  long long dimension = 0;
  std::optional<double> lambda;
  std::string method;
  std::uint64_t seed = 0;
  double value = 0.0;
  double wall_time_ms = 0.0;
  std::optional<long long> iterations;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

inline constexpr const char* kCsvHeader = "experiment,dimension,lambda,method,seed,value,wall_time_ms,iterations";

std::string format_record(const ExperimentRecord& rec);
void write_results_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
std::vector<ExperimentRecord> read_results_csv(const std::filesystem::path& path);

}  // namespace sinkdist
