#pragma once

#include <doctest.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "capfactor/random.hpp"
#include "capfactor/score_data.hpp"

namespace testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("capfactor-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Dataset with the given scores; subtasks named s1.. with `options`
/// choices, models named m01.. with ln(params) spread over [19, 25].
inline capfactor::Dataset make_dataset(const capfactor::Matrix& scores, int options = 4, int questions = 250) {
  capfactor::Dataset ds;
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    ds.subtasks.push_back(capfactor::make_subtask("s" + std::to_string(i + 1), questions, options));
  const auto m = scores.cols();
  for (Eigen::Index j = 0; j < m; ++j) {
    const double x = 19.0 + 6.0 * static_cast<double>(j) / static_cast<double>(std::max<Eigen::Index>(m - 1, 1));
    char id[16];
    std::snprintf(id, sizeof(id), "m%04d", static_cast<int>(j + 1));
    ds.models.push_back(capfactor::make_model(id, std::exp(x)));
  }
  ds.scores = scores;
  return ds;
}

inline capfactor::Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  auto rng = capfactor::substream(seed, 999);
  std::normal_distribution<double> n(0.0, 1.0);
  capfactor::Matrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = n(rng);
  return out;
}

}  // namespace testing
