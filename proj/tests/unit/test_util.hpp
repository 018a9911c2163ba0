#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cslearn/model.hpp"

namespace testutil {

/// |a - b| <= tol * (1 + max(|a|, |b|)).
inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double step = 1e-5) {
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

/// Central finite differences of a scalar function of the parameters.
inline std::vector<double> fd_gradient_theta(
    const std::function<double(const cslearn::Parameterization&)>& f,
    const cslearn::Parameterization& model) {
  std::vector<double> grad(model.param_count());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    const double step = 1e-5 * std::max(1.0, std::abs(model.params()[k]));
    std::vector<double> theta = model.params();
    cslearn::Parameterization probe = model;
    theta[k] += step;
    probe.set_params(theta);
    const double hi = f(probe);
    theta[k] -= 2.0 * step;
    probe.set_params(theta);
    const double lo = f(probe);
    theta[k] += step;
    grad[k] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    char buf[64];
    std::snprintf(buf, sizeof(buf), "cslearn_test_%016llx",
                  static_cast<unsigned long long>(rng()));
    path_ = std::filesystem::temp_directory_path() / buf;
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::string content;
  if (FILE* f = std::fopen(path.c_str(), "rb")) {
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) content.append(buf, got);
    std::fclose(f);
  }
  return content;
}

}  // namespace testutil
