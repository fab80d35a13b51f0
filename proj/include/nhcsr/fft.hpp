#pragma once

// Discrete Fourier transforms for spectral analysis. Unnormalized forward
// transform; arbitrary lengths supported via Bluestein's chirp-z reduction to
// a power-of-two size (solution grids are 32*alpha+1 nodes, never 2^k).
// Evaluation-only: nothing here participates in differentiation.

#include <complex>
#include <cstdint>
#include <vector>

#include "nhcsr/tensor.hpp"

namespace nhcsr {
namespace detail {

inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ContractError("fft_pow2: length must be a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

}  // namespace detail

// In-place DFT of arbitrary length (forward: X_k = sum_j x_j e^{-2*pi*i*jk/n}).
inline void fft(std::vector<std::complex<double>>& a, bool inverse = false) {
  const size_t n = a.size();
  if (n <= 1) return;
  if ((n & (n - 1)) == 0) {
    detail::fft_pow2(a, inverse);
    return;
  }
  // Bluestein: x_j e^{+/-i pi j^2/n} convolved with the conjugate chirp.
  size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> chirp(n);
  for (size_t j = 0; j < n; ++j) {
    // j^2 mod 2n keeps the angle small and exact.
    uint64_t q = (static_cast<uint64_t>(j) * j) % (2 * n);
    double ang = sign * M_PI * static_cast<double>(q) / static_cast<double>(n);
    chirp[j] = {std::cos(ang), std::sin(ang)};
  }
  std::vector<std::complex<double>> av(m, {0.0, 0.0}), bv(m, {0.0, 0.0});
  for (size_t j = 0; j < n; ++j) av[j] = a[j] * chirp[j];
  bv[0] = std::conj(chirp[0]);
  for (size_t j = 1; j < n; ++j) bv[j] = bv[m - j] = std::conj(chirp[j]);
  detail::fft_pow2(av, false);
  detail::fft_pow2(bv, false);
  for (size_t j = 0; j < m; ++j) av[j] *= bv[j];
  detail::fft_pow2(av, true);
  for (size_t k = 0; k < n; ++k) a[k] = av[k] * chirp[k];
  if (inverse) {
    const double invn = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= invn;
  }
}

// Squared magnitude of the 2-D DFT with the zero-frequency bin shifted to the
// array center (index floor(n/2) along each axis). f: [H,W] -> [H,W].
inline Tensor fft2_power(const Tensor& f) {
  if (f.ndim() != 2) throw ShapeError("fft2_power: expects [H,W]");
  const int h = f.size(0), w = f.size(1);
  std::vector<std::complex<double>> grid(static_cast<size_t>(h) * w);
  const double* pf = f.data();
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = {pf[i], 0.0};

  std::vector<std::complex<double>> line(std::max(h, w));
  for (int y = 0; y < h; ++y) {
    line.assign(grid.begin() + static_cast<size_t>(y) * w, grid.begin() + static_cast<size_t>(y + 1) * w);
    fft(line);
    std::copy(line.begin(), line.end(), grid.begin() + static_cast<size_t>(y) * w);
  }
  for (int x = 0; x < w; ++x) {
    line.resize(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) line[static_cast<size_t>(y)] = grid[static_cast<size_t>(y) * w + x];
    fft(line);
    for (int y = 0; y < h; ++y) grid[static_cast<size_t>(y) * w + x] = line[static_cast<size_t>(y)];
  }

  NoGradGuard ng;
  Tensor out = Tensor::zeros({h, w});
  double* po = out.data();
  for (int y = 0; y < h; ++y) {
    int ys = (y + h / 2) % h;  // fftshift
    for (int x = 0; x < w; ++x) {
      int xs = (x + w / 2) % w;
      po[static_cast<size_t>(ys) * w + xs] = std::norm(grid[static_cast<size_t>(y) * w + x]);
    }
  }
  return out;
}

}  // namespace nhcsr
