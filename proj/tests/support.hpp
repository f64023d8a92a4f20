#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "covdecomp/matrix.hpp"
#include "covdecomp/rng.hpp"

namespace testing {

// Random SPD matrix with eigenvalues in [lo, hi], built from a random orthogonal basis.
inline covdecomp::SymmetricMatrix random_spd(int p, covdecomp::Rng& rng, double lo = 0.5, double hi = 3.0) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd d(p);
  for (int i = 0; i < p; ++i) d(i) = lo + (hi - lo) * rng.uniform01();
  Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
  return covdecomp::SymmetricMatrix(0.5 * (m + m.transpose()));
}

inline covdecomp::SymmetricMatrix random_symmetric(int p, covdecomp::Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = scale * rng.normal();
  return covdecomp::SymmetricMatrix(a);
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("covdecomp-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
