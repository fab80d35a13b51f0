#pragma once

// Figure-style export: normalize -> gain -> modulo-255 pixel pipeline, JET
// colormap lookup, portable pixmap output, and middle row/column CSV slices.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nhcsr/field.hpp"
#include "nhcsr/io.hpp"

namespace nhcsr {

// Classic JET colormap: piecewise-linear ramps sampled at 256 levels. The
// table is fixed at compile time so images are bit-reproducible.
inline const std::array<std::array<uint8_t, 3>, 256>& jet_lut() {
  static const std::array<std::array<uint8_t, 3>, 256> lut = [] {
    std::array<std::array<uint8_t, 3>, 256> t{};
    auto ramp = [](double x) { return std::min(std::max(x, 0.0), 1.0); };
    for (int i = 0; i < 256; ++i) {
      double v = i / 255.0;
      double r = ramp(1.5 - std::abs(4.0 * v - 3.0));
      double g = ramp(1.5 - std::abs(4.0 * v - 2.0));
      double b = ramp(1.5 - std::abs(4.0 * v - 1.0));
      t[static_cast<size_t>(i)] = {static_cast<uint8_t>(std::lround(255.0 * r)),
                                   static_cast<uint8_t>(std::lround(255.0 * g)),
                                   static_cast<uint8_t>(std::lround(255.0 * b))};
    }
    return t;
  }();
  return lut;
}

// Pixel pipeline: min/max-normalize to [0,255], multiply by gain, take the
// value modulo 255. A constant field maps to 0.
inline uint8_t plot_pixel(double v, double lo, double hi, double gain) {
  double range = hi - lo;
  double v01 = range > 0.0 ? (v - lo) / range : 0.0;
  double m = std::fmod(v01 * 255.0 * gain, 255.0);
  if (m < 0.0) m += 255.0;
  return static_cast<uint8_t>(m);
}

struct PlotOptions {
  double gain = 8.0;
  std::string colormap = "jet";  // "jet" | "gray"
};

// Renders a field to interleaved bytes: RGB for jet, single channel for gray.
inline std::vector<uint8_t> render_field(const std::vector<double>& v, const PlotOptions& opt) {
  if (opt.colormap != "jet" && opt.colormap != "gray")
    throw ConfigError("unsupported colormap '" + opt.colormap + "' (jet|gray)");
  double lo = v.empty() ? 0.0 : v[0], hi = lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<uint8_t> out;
  if (opt.colormap == "jet") {
    const auto& lut = jet_lut();
    out.reserve(v.size() * 3);
    for (double x : v) {
      const auto& rgb = lut[plot_pixel(x, lo, hi, opt.gain)];
      out.push_back(rgb[0]);
      out.push_back(rgb[1]);
      out.push_back(rgb[2]);
    }
  } else {
    out.reserve(v.size());
    for (double x : v) out.push_back(plot_pixel(x, lo, hi, opt.gain));
  }
  return out;
}

// Binary portable pixmap: P6 for RGB data, P5 for single-channel data.
inline void write_pnm(const std::string& path, const std::vector<uint8_t>& pixels, int w, int h) {
  size_t n = static_cast<size_t>(w) * h;
  bool rgb;
  if (pixels.size() == 3 * n)
    rgb = true;
  else if (pixels.size() == n)
    rgb = false;
  else
    throw ContractError("write_pnm: pixel buffer does not match extents");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open image for writing: " + path);
  out << (rgb ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failure: " + path);
}

// Middle row (y = n/2) and middle column (x = n/2) as CSV for line plots.
inline void write_slices_csv(const std::string& path, const GridField& g) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open slice file for writing: " + path);
  out << "index,row_value,col_value\n";
  int mid = g.n / 2;
  char buf[128];
  for (int i = 0; i < g.n; ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", i, g.at(i, mid), g.at(mid, i));
    out << buf;
  }
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace nhcsr
