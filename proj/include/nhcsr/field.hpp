#pragma once

// Grid-shaped domain types shared by data generation, the model, and metrics.

#include <cstdint>
#include <string>
#include <vector>

#include "nhcsr/error.hpp"

namespace nhcsr {

// Nodal field on an N x N uniform grid over the unit square. Row-major with
// the x axis over columns: value(ix, iy) = v[iy*n + ix]. Homogeneous Dirichlet
// data: boundary nodes must be exactly zero.
struct GridField {
  int n = 0;
  std::vector<double> v;

  GridField() = default;
  explicit GridField(int n_) : n(n_), v(static_cast<size_t>(n_) * n_, 0.0) {
    if (n_ < 2) throw ContractError("GridField: need at least 2 nodes per side");
  }

  double& at(int ix, int iy) { return v[static_cast<size_t>(iy) * n + ix]; }
  double at(int ix, int iy) const { return v[static_cast<size_t>(iy) * n + ix]; }
  bool is_boundary(int ix, int iy) const { return ix == 0 || iy == 0 || ix == n - 1 || iy == n - 1; }
};

// Piecewise-constant scalar coefficient on an E x E cell grid (cell size 1/E),
// values drawn from a two-point set {lo, hi} (default {1, 100}).
struct CoefficientMap {
  int e = 0;
  std::vector<double> v;  // row-major: v[cy*e + cx]
  std::string pattern;
  uint64_t seed = 0;
  double lo = 1.0, hi = 100.0;

  CoefficientMap() = default;
  CoefficientMap(int e_, double fill) : e(e_), v(static_cast<size_t>(e_) * e_, fill) {
    if (e_ < 2) throw ContractError("CoefficientMap: E must be >= 2");
  }

  double& at(int cx, int cy) { return v[static_cast<size_t>(cy) * e + cx]; }
  double at(int cx, int cy) const { return v[static_cast<size_t>(cy) * e + cx]; }

  void validate() const {
    if (e < 2) throw ContractError("CoefficientMap: E must be >= 2");
    for (double a : v)
      if (a != lo && a != hi) throw ContractError("CoefficientMap: value outside {lo,hi}");
  }
};

}  // namespace nhcsr
