#pragma once

// Evaluation metrics on nodal fields: MSE / MAE / PSNR, windowed SSIM, and
// the radially averaged power spectral density. All metric inputs are
// expected on the normalized [0,1] value scale.

#include <cmath>
#include <limits>
#include <vector>

#include "nhcsr/fft.hpp"
#include "nhcsr/field.hpp"

namespace nhcsr {

// Affine map of a raw field onto the dataset's [0,1] normalization.
struct Normalizer {
  double lo = 0.0;
  double range = 1.0;

  static Normalizer from_minmax(double mn, double mx) {
    Normalizer n;
    n.lo = mn;
    n.range = mx - mn > 0.0 ? mx - mn : 1.0;
    return n;
  }
  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - lo) / range;
    return out;
  }
};

namespace detail {
inline void check_same_size(const std::vector<double>& a, const std::vector<double>& b,
                            const char* op) {
  if (a.size() != b.size()) throw ShapeError(std::string(op) + ": size mismatch");
  if (a.empty()) throw ShapeError(std::string(op) + ": empty input");
}
}  // namespace detail

inline double mse(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_same_size(a, b, "mse");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

inline double mae(const std::vector<double>& a, const std::vector<double>& b) {
  detail::check_same_size(a, b, "mae");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

// PSNR on [0,1] data: -10*log10(mse); identical fields yield +infinity.
inline double psnr(const std::vector<double>& a, const std::vector<double>& b) {
  double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(m);
}

inline constexpr int kSsimWindow = 8;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// Mean SSIM over all 8x8 windows at stride 1 (uniform window weights,
// population statistics), via summed-area tables.
inline double ssim(const std::vector<double>& a, const std::vector<double>& b, int h, int w) {
  detail::check_same_size(a, b, "ssim");
  if (static_cast<size_t>(h) * w != a.size()) throw ShapeError("ssim: extents do not match data");
  if (h < kSsimWindow || w < kSsimWindow)
    throw ShapeError("ssim: field smaller than the " + std::to_string(kSsimWindow) + "x" +
                     std::to_string(kSsimWindow) + " window");

  // Summed-area tables for a, b, a^2, b^2 and a*b, each (h+1) x (w+1).
  const int sw = w + 1;
  std::vector<double> sa(static_cast<size_t>(h + 1) * sw, 0.0), sb(sa), saa(sa), sbb(sa), sab(sa);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      size_t i = static_cast<size_t>(y) * w + x;
      size_t c = static_cast<size_t>(y + 1) * sw + (x + 1);
      size_t up = c - sw, left = c - 1, diag = up - 1;
      sa[c] = a[i] + sa[up] + sa[left] - sa[diag];
      sb[c] = b[i] + sb[up] + sb[left] - sb[diag];
      saa[c] = a[i] * a[i] + saa[up] + saa[left] - saa[diag];
      sbb[c] = b[i] * b[i] + sbb[up] + sbb[left] - sbb[diag];
      sab[c] = a[i] * b[i] + sab[up] + sab[left] - sab[diag];
    }
  auto window_sum = [&](const std::vector<double>& s, int y, int x) {
    size_t c = static_cast<size_t>(y + kSsimWindow) * sw + (x + kSsimWindow);
    size_t up = static_cast<size_t>(y) * sw + (x + kSsimWindow);
    size_t left = static_cast<size_t>(y + kSsimWindow) * sw + x;
    size_t diag = static_cast<size_t>(y) * sw + x;
    return s[c] - s[up] - s[left] + s[diag];
  };

  const double inv = 1.0 / (kSsimWindow * kSsimWindow);
  double acc = 0.0;
  int count = 0;
  for (int y = 0; y + kSsimWindow <= h; ++y)
    for (int x = 0; x + kSsimWindow <= w; ++x) {
      double ma = window_sum(sa, y, x) * inv;
      double mb = window_sum(sb, y, x) * inv;
      double va = window_sum(saa, y, x) * inv - ma * ma;
      double vb = window_sum(sbb, y, x) * inv - mb * mb;
      double cab = window_sum(sab, y, x) * inv - ma * mb;
      double num = (2.0 * ma * mb + kSsimC1) * (2.0 * cab + kSsimC2);
      double den = (ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2);
      acc += num / den;
      ++count;
    }
  return acc / static_cast<double>(count);
}

inline double ssim(const GridField& a, const GridField& b) {
  if (a.n != b.n) throw ShapeError("ssim: field sizes differ");
  return ssim(a.v, b.v, a.n, a.n);
}

struct RapsdBin {
  int radius = 0;
  double power = 0.0;  // mean power over the annulus
  int count = 0;       // pixels in the annulus
};

// Radially averaged power spectrum: mean fft2_power per integer-rounded
// radius around the centered zero-frequency bin. Radii beyond
// floor(min(H,W)/2) are folded into the outermost annulus, so the annuli
// partition the spectrum.
inline std::vector<RapsdBin> rapsd(const std::vector<double>& field, int h, int w) {
  if (static_cast<size_t>(h) * w != field.size()) throw ShapeError("rapsd: extents do not match data");
  Tensor power = fft2_power(Tensor::from_data({h, w}, field));
  const int rmax = std::min(h, w) / 2;
  std::vector<RapsdBin> bins(static_cast<size_t>(rmax) + 1);
  for (int r = 0; r <= rmax; ++r) bins[static_cast<size_t>(r)].radius = r;
  const int cy = h / 2, cx = w / 2;
  const double* pp = power.data();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double dy = y - cy, dx = x - cx;
      int r = static_cast<int>(std::lround(std::sqrt(dy * dy + dx * dx)));
      if (r > rmax) r = rmax;
      bins[static_cast<size_t>(r)].power += pp[static_cast<size_t>(y) * w + x];
      bins[static_cast<size_t>(r)].count += 1;
    }
  for (RapsdBin& b : bins)
    if (b.count > 0) b.power /= static_cast<double>(b.count);
  return bins;
}

inline std::vector<RapsdBin> rapsd(const GridField& f) { return rapsd(f.v, f.n, f.n); }

}  // namespace nhcsr
