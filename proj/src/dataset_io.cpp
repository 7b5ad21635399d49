#include "sinkdist/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "sinkdist/errors.hpp"

namespace sinkdist {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

void put_be32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                         static_cast<char>(v)};
  out.write(bytes, 4);
}

std::string hex_bytes(const std::vector<unsigned char>& b, std::size_t n) {
  std::ostringstream s;
  s << std::hex << std::setfill('0');
  for (std::size_t i = 0; i < n && i < b.size(); ++i) s << (i ? " " : "") << std::setw(2) << int{b[i]};
  return s.str();
}

void check_header(const std::vector<unsigned char>& bytes, std::size_t header_size, std::uint32_t magic,
                  const std::filesystem::path& path) {
  if (bytes.size() >= 4 && be32(bytes, 0) != magic) {
    std::ostringstream msg;
    msg << path.string() << ": bad IDX magic, expected 0x" << std::hex << std::setw(8) << std::setfill('0') << magic
        << ", found bytes " << hex_bytes(bytes, 4);
    throw FormatError(msg.str());
  }
  if (bytes.size() < header_size) {
    throw FormatError(path.string() + ": file too short for IDX header (" + std::to_string(bytes.size()) +
                      " bytes)");
  }
}

void check_payload(std::size_t expected, std::size_t actual, const std::filesystem::path& path) {
  if (expected != actual) {
    throw FormatError(path.string() + ": payload has " + std::to_string(actual) + " bytes, header implies " +
                      std::to_string(expected));
  }
}

unsigned char to_byte(double x) {
  const double r = std::round(x);
  if (!(r >= 0.0 && r <= 255.0)) throw DomainError("IDX pixel out of byte range");
  return static_cast<unsigned char>(r);
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

std::vector<Matrix> read_idx_images(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  check_header(bytes, 16, kIdxImageMagic, path);
  const std::size_t count = be32(bytes, 4), rows = be32(bytes, 8), cols = be32(bytes, 12);
  check_payload(count * rows * cols, bytes.size() - 16, path);
  std::vector<Matrix> out;
  out.reserve(count);
  std::size_t off = 16;
  for (std::size_t n = 0; n < count; ++n) {
    Matrix img(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index y = 0; y < img.rows(); ++y) {
      for (Eigen::Index x = 0; x < img.cols(); ++x) img(y, x) = bytes[off++];
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  check_header(bytes, 8, kIdxLabelMagic, path);
  const std::size_t count = be32(bytes, 4);
  check_payload(count, bytes.size() - 8, path);
  return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const std::vector<Matrix>& images, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const Eigen::Index rows = images.empty() ? 0 : images.front().rows();
  const Eigen::Index cols = images.empty() ? 0 : images.front().cols();
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(images.size()));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  for (const auto& img : images) {
    if (img.rows() != rows || img.cols() != cols) throw DomainError("write_idx_images: images differ in size");
    for (Eigen::Index y = 0; y < rows; ++y) {
      for (Eigen::Index x = 0; x < cols; ++x) out.put(static_cast<char>(to_byte(img(y, x))));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_idx_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) out.put(static_cast<char>(to_byte(l)));
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix center_crop(const Matrix& image, Eigen::Index rows, Eigen::Index cols) {
  if (rows > image.rows() || cols > image.cols() || rows < 1 || cols < 1) {
    throw DomainError("center_crop: window larger than image");
  }
  return image.block((image.rows() - rows) / 2, (image.cols() - cols) / 2, rows, cols);
}

LabeledHistogramSet load_labeled_histograms(const std::filesystem::path& images, const std::filesystem::path& labels,
                                            const LoadOptions& opts) {
  auto grids = read_idx_images(images);
  auto tags = read_idx_labels(labels);
  if (grids.size() != tags.size()) {
    throw FormatError("image file has " + std::to_string(grids.size()) + " entries, label file " +
                      std::to_string(tags.size()));
  }
  LabeledHistogramSet set;
  set.source = images.string();
  for (std::size_t n = 0; n < grids.size(); ++n) {
    if (opts.limit && set.histograms.size() == opts.limit) break;
    const Matrix img = opts.crop ? center_crop(grids[n], *opts.crop, *opts.crop) : grids[n];
    if (!(img.array() > 0.0).any()) {
      ++set.skipped_empty;
      continue;
    }
    set.histograms.push_back(image_to_histogram(img));
    set.labels.push_back(tags[n]);
  }
  int max_label = -1;
  for (int l : set.labels) max_label = std::max(max_label, l);
  set.num_classes = std::max(max_label + 1, 1);
  return set;
}

std::string format_record(const ExperimentRecord& rec) {
  std::string line = rec.experiment;
  line += ',' + std::to_string(rec.dimension);
  line += ',' + (rec.lambda ? fmt_double(*rec.lambda) : std::string());
  line += ',' + rec.method;
  line += ',' + std::to_string(rec.seed);
  line += ',' + fmt_double(rec.value);
  line += ',' + fmt_double(rec.wall_time_ms);
  line += ',' + (rec.iterations ? std::to_string(*rec.iterations) : std::string());
  return line;
}

void write_results_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& rec : records) out << format_record(rec) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ExperimentRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw FormatError(path.string() + ": missing CSV header");
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw FormatError(path.string() + ": expected 8 fields, got " + std::to_string(f.size()));
    ExperimentRecord rec;
    rec.experiment = f[0];
    rec.dimension = std::stoll(f[1]);
    if (!f[2].empty()) rec.lambda = std::stod(f[2]);
    rec.method = f[3];
    rec.seed = std::stoull(f[4]);
    rec.value = std::stod(f[5]);
    rec.wall_time_ms = std::stod(f[6]);
    if (!f[7].empty()) rec.iterations = std::stoll(f[7]);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace sinkdist
