#pragma once

// Q1 finite elements for -div(A grad u) = f on the unit square with
// homogeneous Dirichlet boundary, on a uniform H x H element grid. The
// assembled interior system has a fixed 9-point stencil, stored directly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "nhcsr/field.hpp"

namespace nhcsr {

// Right-hand-side descriptor; tag 0 = constant (the only tag defined so far).
struct SourceSpec {
  uint32_t tag = 0;
  double value = 1.0;

  std::function<double(double, double)> fn() const {
    if (tag != 0) throw ConfigError("unknown source tag " + std::to_string(tag));
    double v = value;
    return [v](double, double) { return v; };
  }
};

// Symmetric 9-point stencil operator over the (H-1) x (H-1) interior nodes.
struct StencilMatrix {
  int n = 0;                // interior nodes per side
  std::vector<double> s;    // n*n rows x 9 offsets, k = (dy+1)*3 + (dx+1)

  explicit StencilMatrix(int n_) : n(n_), s(static_cast<size_t>(n_) * n_ * 9, 0.0) {}

  int rows() const { return n * n; }
  double& at(int row, int dx, int dy) { return s[static_cast<size_t>(row) * 9 + (dy + 1) * 3 + (dx + 1)]; }
  double at(int row, int dx, int dy) const { return s[static_cast<size_t>(row) * 9 + (dy + 1) * 3 + (dx + 1)]; }

  void matvec(const double* x, double* y) const {
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        int row = iy * n + ix;
        const double* st = s.data() + static_cast<size_t>(row) * 9;
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          int jy = iy + dy;
          if (jy < 0 || jy >= n) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            int jx = ix + dx;
            if (jx < 0 || jx >= n) continue;
            acc += st[(dy + 1) * 3 + (dx + 1)] * x[jy * n + jx];
          }
        }
        y[row] = acc;
      }
  }

  std::vector<double> diag() const {
    std::vector<double> d(static_cast<size_t>(rows()));
    for (int row = 0; row < rows(); ++row) d[static_cast<size_t>(row)] = s[static_cast<size_t>(row) * 9 + 4];
    return d;
  }

  std::vector<double> to_dense() const {
    std::vector<double> m(static_cast<size_t>(rows()) * rows(), 0.0);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        int row = iy * n + ix;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            int jx = ix + dx, jy = iy + dy;
            if (jx < 0 || jx >= n || jy < 0 || jy >= n) continue;
            m[static_cast<size_t>(row) * rows() + (jy * n + jx)] = at(row, dx, dy);
          }
      }
    return m;
  }
};

struct FemProblem {
  CoefficientMap coefficient;
  int h_cells = 0;  // elements per side; h = 1/H
  std::function<double(double, double)> source = [](double, double) { return 1.0; };
};

struct FemSystem {
  StencilMatrix k;
  std::vector<double> b;
};

namespace detail {

// Reference Q1 element stiffness for unit coefficient on a square element
// (scale-free in 2D); node order (0,0),(1,0),(1,1),(0,1).
inline constexpr double kElemStiff[4][4] = {
    {4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0},
    {-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0}};

inline constexpr int kLocalDx[4] = {0, 1, 1, 0};
inline constexpr int kLocalDy[4] = {0, 0, 1, 1};

inline double q1_basis(int local, double xi, double eta) {
  double fx = kLocalDx[local] == 0 ? (1.0 - xi) : (1.0 + xi);
  double fy = kLocalDy[local] == 0 ? (1.0 - eta) : (1.0 + eta);
  return 0.25 * fx * fy;
}

}  // namespace detail

// Coefficient cell containing the barycenter of element (ex, ey) on an H grid.
inline double coefficient_at_element(const CoefficientMap& a, int h_cells, int ex, int ey) {
  double bx = (ex + 0.5) / static_cast<double>(h_cells);
  double by = (ey + 0.5) / static_cast<double>(h_cells);
  int cx = std::min(static_cast<int>(bx * a.e), a.e - 1);
  int cy = std::min(static_cast<int>(by * a.e), a.e - 1);
  return a.at(cx, cy);
}

// Assembles the interior stiffness matrix and load vector (Dirichlet rows and
// columns eliminated; boundary values are zero so no lifting term appears).
inline FemSystem assemble_stiffness(const FemProblem& p) {
  const int h = p.h_cells;
  const int e = p.coefficient.e;
  if (h < 2) throw ConfigError("grid resolution H must be >= 2");
  if (e % h != 0 && h % e != 0)
    throw ConfigError("coefficient grid E=" + std::to_string(e) +
                      " incompatible with resolution H=" + std::to_string(h) +
                      " (one must divide the other)");
  for (double a : p.coefficient.v)
    if (!(a > 0.0)) throw ContractError("coefficient must be strictly positive");

  const int ni = h - 1;
  const double hh = 1.0 / static_cast<double>(h);
  FemSystem sys{StencilMatrix(ni), std::vector<double>(static_cast<size_t>(ni) * ni, 0.0)};

  const double gp = 1.0 / std::sqrt(3.0);
  const double gauss[2] = {-gp, gp};

  for (int ey = 0; ey < h; ++ey) {
    for (int ex = 0; ex < h; ++ex) {
      double a_e = coefficient_at_element(p.coefficient, h, ex, ey);
      // Element load at the four 2x2 Gauss points, Jacobian h^2/4, weight 1.
      double bloc[4] = {0.0, 0.0, 0.0, 0.0};
      for (int gy = 0; gy < 2; ++gy)
        for (int gx = 0; gx < 2; ++gx) {
          double xg = (ex + 0.5 * (1.0 + gauss[gx])) * hh;
          double yg = (ey + 0.5 * (1.0 + gauss[gy])) * hh;
          double fv = p.source(xg, yg);
          for (int l = 0; l < 4; ++l) bloc[l] += fv * detail::q1_basis(l, gauss[gx], gauss[gy]);
        }
      for (int li = 0; li < 4; ++li) {
        int nx = ex + detail::kLocalDx[li], ny = ey + detail::kLocalDy[li];
        if (nx == 0 || ny == 0 || nx == h || ny == h) continue;  // Dirichlet row
        int row = (ny - 1) * ni + (nx - 1);
        sys.b[static_cast<size_t>(row)] += bloc[li] * hh * hh * 0.25;
        for (int lj = 0; lj < 4; ++lj) {
          int mx = ex + detail::kLocalDx[lj], my = ey + detail::kLocalDy[lj];
          if (mx == 0 || my == 0 || mx == h || my == h) continue;  // Dirichlet column, u=0
          sys.k.at(row, mx - nx, my - ny) += a_e * detail::kElemStiff[li][lj];
        }
      }
    }
  }
  return sys;
}

struct CgResult {
  std::vector<double> x;
  int iters = 0;
  double final_residual = 0.0;          // relative preconditioned residual
  std::vector<double> history;          // relative residual per iteration, [0]=1
};

// Jacobi-preconditioned conjugate gradients for an SPD operator given as a
// matvec callback plus its diagonal.
template <class MatVec>
CgResult solve_cg(int n, MatVec&& matvec, const std::vector<double>& diag,
                  const std::vector<double>& b, double tol = 1e-10, int maxiter = -1) {
  if (static_cast<int>(diag.size()) != n || static_cast<int>(b.size()) != n)
    throw ContractError("solve_cg: size mismatch");
  for (double d : diag)
    if (!(d > 0.0)) throw NumericError("solve_cg: Jacobi preconditioner needs positive diagonal");
  if (maxiter < 0) maxiter = 10 * n;

  CgResult res;
  res.x.assign(static_cast<size_t>(n), 0.0);
  std::vector<double> r(b), z(static_cast<size_t>(n)), p(static_cast<size_t>(n)),
      q(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] / diag[static_cast<size_t>(i)];
  double rz = 0.0;
  for (int i = 0; i < n; ++i) rz += r[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
  double bnorm = std::sqrt(rz);
  if (bnorm == 0.0) {
    res.history.push_back(0.0);
    return res;  // b = 0 -> x = 0, zero iterations
  }
  res.history.push_back(1.0);
  p = z;
  for (int it = 1; it <= maxiter; ++it) {
    matvec(p.data(), q.data());
    double pq = 0.0;
    for (int i = 0; i < n; ++i) pq += p[static_cast<size_t>(i)] * q[static_cast<size_t>(i)];
    if (!(pq > 0.0)) throw NumericError("solve_cg: operator not positive definite (p'Kp <= 0)");
    double alpha = rz / pq;
    for (int i = 0; i < n; ++i) {
      res.x[static_cast<size_t>(i)] += alpha * p[static_cast<size_t>(i)];
      r[static_cast<size_t>(i)] -= alpha * q[static_cast<size_t>(i)];
    }
    for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = r[static_cast<size_t>(i)] / diag[static_cast<size_t>(i)];
    double rz_new = 0.0;
    for (int i = 0; i < n; ++i) rz_new += r[static_cast<size_t>(i)] * z[static_cast<size_t>(i)];
    double rel = std::sqrt(std::max(rz_new, 0.0)) / bnorm;
    res.history.push_back(rel);
    res.iters = it;
    res.final_residual = rel;
    if (rel <= tol) return res;
    double beta = rz_new / rz;
    for (int i = 0; i < n; ++i)
      p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
    rz = rz_new;
  }
  throw ConvergenceError("solve_cg: no convergence in " + std::to_string(maxiter) +
                             " iterations (relative residual " +
                             std::to_string(res.final_residual) + ")",
                         res.final_residual);
}

inline CgResult solve_cg(const StencilMatrix& k, const std::vector<double>& b, double tol = 1e-10,
                         int maxiter = -1) {
  return solve_cg(k.rows(), [&k](const double* x, double* y) { k.matvec(x, y); }, k.diag(), b, tol,
                  maxiter);
}

// Assembles and solves; returns the nodal field with exact-zero boundary.
inline GridField fem_solve(const FemProblem& p, CgResult* stats = nullptr) {
  FemSystem sys = assemble_stiffness(p);
  CgResult r = solve_cg(sys.k, sys.b);
  const int h = p.h_cells, ni = h - 1;
  GridField u(h + 1);
  for (int iy = 1; iy < h; ++iy)
    for (int ix = 1; ix < h; ++ix) u.at(ix, iy) = r.x[static_cast<size_t>((iy - 1) * ni + (ix - 1))];
  for (double v : u.v)
    if (!std::isfinite(v)) throw NumericError("fem_solve: non-finite solution value");
  if (stats) *stats = std::move(r);
  return u;
}

}  // namespace nhcsr
