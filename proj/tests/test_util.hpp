#pragma once

// Shared fixtures: scratch directories and deterministic random tensors.

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "nhcsr/rng.hpp"
#include "nhcsr/tensor.hpp"

namespace nhtest {

// Per-process scratch directory (removed on process exit by the OS tmp
// reaper; names are pid-unique so parallel test binaries cannot collide).
inline std::string scratch_dir(const std::string& tag) {
  static const std::string base = [] {
    auto p = std::filesystem::temp_directory_path() /
             ("nhcsr_tests_" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p.string();
  }();
  std::string dir = base + "/" + tag;
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string scratch_path(const std::string& tag, const std::string& name) {
  return scratch_dir(tag) + "/" + name;
}

// Values in [lo, hi); requires_grad on by default since these feed grad checks.
inline nhcsr::Tensor random_tensor(nhcsr::Shape shape, uint64_t seed, double lo = -1.0,
                                   double hi = 1.0, bool requires_grad = true) {
  nhcsr::Rng rng(seed);
  int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<size_t>(n));
  for (double& v : data) v = rng.uniform(lo, hi);
  return nhcsr::Tensor::from_data(std::move(shape), std::move(data), requires_grad);
}

// Same grid twice with one branch shifted away from kinks of |.| and relu.
inline nhcsr::Tensor random_tensor_away_from(nhcsr::Shape shape, uint64_t seed, double gap) {
  nhcsr::Tensor t = random_tensor(std::move(shape), seed, -1.0, 1.0);
  for (int64_t i = 0; i < t.numel(); ++i) {
    double& v = t.data()[i];
    if (std::abs(v) < gap) v = v < 0.0 ? v - gap : v + gap;
  }
  return t;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace nhtest
