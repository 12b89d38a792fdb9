#pragma once

#include "mrgap/point_cloud.hpp"

#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline mrgap::RowMatrix gaussian_matrix(mrgap::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  mrgap::RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline mrgap::Matrix random_orthogonal(mrgap::Rng& rng, Eigen::Index n) {
  const mrgap::Matrix g = gaussian_matrix(rng, n, n);
  Eigen::HouseholderQR<mrgap::Matrix> qr(g);
  return qr.householderQ();
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mrgap-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
