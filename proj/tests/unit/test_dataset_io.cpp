#include <filesystem>
#include <random>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sinkdist/dataset_io.hpp"
#include "sinkdist/errors.hpp"

using namespace sinkdist;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sinkdist_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("dataset_io") {
  TEST_CASE("hand-built image file") {
    TempDir tmp;
    const fs::path p = tmp.path / "img.idx";
    write_bytes(p, {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2, 3, 4, 5, 6, 7});
    const auto images = read_idx_images(p);
    REQUIRE(images.size() == 2);
    CHECK(images[0] == Matrix{{0, 1}, {2, 3}});
    CHECK(images[1] == Matrix{{4, 5}, {6, 7}});

    write_idx_images(images, tmp.path / "copy.idx");
    CHECK(slurp(tmp.path / "copy.idx") == slurp(p));
  }

  TEST_CASE("label file round trip") {
    TempDir tmp;
    const fs::path p = tmp.path / "lab.idx";
    write_bytes(p, {0, 0, 8, 1, 0, 0, 0, 3, 7, 0, 9});
    CHECK(read_idx_labels(p) == std::vector<int>{7, 0, 9});
    write_idx_labels({7, 0, 9}, tmp.path / "copy.idx");
    CHECK(slurp(tmp.path / "copy.idx") == slurp(p));
  }

  TEST_CASE("format errors") {
    TempDir tmp;
    const fs::path labels = tmp.path / "lab.idx";
    write_bytes(labels, {0, 0, 8, 1, 0, 0, 0, 3, 7, 0, 9});
    CHECK(error_of([&] { (void)read_idx_images(labels); }).find("00 00 08 01") != std::string::npos);

    const fs::path images = tmp.path / "img.idx";
    write_bytes(images, {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 9});
    CHECK_THROWS_AS(read_idx_labels(images), FormatError);

    const fs::path empty = tmp.path / "empty.idx";
    write_bytes(empty, {});
    CHECK_THROWS_AS(read_idx_images(empty), FormatError);

    const fs::path short_labels = tmp.path / "short.idx";
    write_bytes(short_labels, {0, 0, 8, 1, 0, 0, 0, 5, 1, 2});
    const std::string msg = error_of([&] { (void)read_idx_labels(short_labels); });
    CHECK(msg.find('2') != std::string::npos);
    CHECK(msg.find('5') != std::string::npos);

    const fs::path truncated = tmp.path / "trunc.idx";
    write_bytes(truncated, {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 1, 2});
    CHECK_THROWS_AS(read_idx_images(truncated), FormatError);
    CHECK_THROWS_AS(read_idx_images(tmp.path / "missing.idx"), IoError);
  }

  TEST_CASE("labeled histograms with crop and empty images") {
    TempDir tmp;
    std::vector<Matrix> images;
    Matrix a = Matrix::Zero(6, 6);
    a(2, 3) = 255;
    Matrix blank = Matrix::Zero(6, 6);
    blank(0, 0) = 40;  // outside the 4x4 crop
    Matrix b = Matrix::Constant(6, 6, 10);
    images = {a, blank, b};
    write_idx_images(images, tmp.path / "img.idx");
    write_idx_labels({3, 1, 4}, tmp.path / "lab.idx");

    LoadOptions opts;
    opts.crop = 4;
    const auto set = load_labeled_histograms(tmp.path / "img.idx", tmp.path / "lab.idx", opts);
    CHECK(set.skipped_empty == 1);
    REQUIRE(set.histograms.size() == 2);
    CHECK(set.labels == std::vector<int>{3, 4});
    CHECK(set.num_classes == 5);
    CHECK(set.histograms[0].size() == 16);
    CHECK(set.histograms[0][1 * 4 + 2] == 1.0);

    opts.limit = 1;
    CHECK(load_labeled_histograms(tmp.path / "img.idx", tmp.path / "lab.idx", opts).histograms.size() == 1);

    write_idx_labels({3, 1}, tmp.path / "short.idx");
    CHECK_THROWS_AS(load_labeled_histograms(tmp.path / "img.idx", tmp.path / "short.idx"), FormatError);
  }

  TEST_CASE("center crop") {
    Matrix img(4, 4);
    for (int k = 0; k < 16; ++k) img.data()[k] = k;
    CHECK(center_crop(img, 2, 2) == img.block(1, 1, 2, 2));
    CHECK_THROWS_AS(center_crop(img, 5, 2), DomainError);
  }

  TEST_CASE("results CSV") {
    TempDir tmp;
    write_results_csv({}, tmp.path / "empty.csv");
    CHECK(slurp(tmp.path / "empty.csv") == std::string(kCsvHeader) + "\n");
    CHECK(read_results_csv(tmp.path / "empty.csv").empty());

    const std::vector<ExperimentRecord> recs{
        {"gap", 100, 9.0, "sinkhorn", 18446744073709551615ULL, 0.125, 3.5, 17},
        {"timing", 512, std::nullopt, "emd", 2, 0.0424242424, 110.25, std::nullopt},
    };
    write_results_csv(recs, tmp.path / "a.csv");
    write_results_csv(recs, tmp.path / "b.csv");
    CHECK(slurp(tmp.path / "a.csv") == slurp(tmp.path / "b.csv"));
    const auto back = read_results_csv(tmp.path / "a.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0] == recs[0]);
    CHECK(back[1].experiment == "timing");
    CHECK_FALSE(back[1].lambda.has_value());
    CHECK_FALSE(back[1].iterations.has_value());
    CHECK(back[1].value == doctest::Approx(0.0424242424).epsilon(1e-9));

    CHECK_THROWS_AS(write_results_csv(recs, tmp.path / "no" / "such" / "dir.csv"), IoError);
  }
}
