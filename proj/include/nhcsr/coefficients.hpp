#pragma once

// Binary coefficient pattern generators: random, checkerboard, wave, stride,
// and a random rectangular mix of the three deterministic patterns.

#include <cmath>
#include <sstream>
#include <string>

#include "nhcsr/field.hpp"
#include "nhcsr/rng.hpp"

namespace nhcsr {

enum class PatternKind { random, checkerboard, wave, stride, mix };

struct PatternSpec {
  PatternKind kind = PatternKind::random;
  int period = 4;     // checkerboard block size / wave stripe size (cells)
  double amplitude = 3.0;  // wave horizontal displacement (cells)
  int width = 4;      // stride band width (cells)

  std::string str() const {
    std::ostringstream os;
    switch (kind) {
      case PatternKind::random: os << "random"; break;
      case PatternKind::checkerboard: os << "checkerboard:" << period; break;
      case PatternKind::wave: os << "wave:" << period << "," << amplitude; break;
      case PatternKind::stride: os << "stride:" << width; break;
      case PatternKind::mix: os << "mix"; break;
    }
    return os.str();
  }
};

// Parses "random" | "checkerboard[:p]" | "wave[:p[,amp]]" | "stride[:w]" | "mix".
inline PatternSpec parse_pattern(const std::string& text) {
  PatternSpec s;
  std::string name = text, args;
  if (auto pos = text.find(':'); pos != std::string::npos) {
    name = text.substr(0, pos);
    args = text.substr(pos + 1);
  }
  auto num = [&](const std::string& a) {
    try {
      size_t used = 0;
      double val = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      return val;
    } catch (const std::exception&) {
      throw ConfigError("bad pattern argument '" + a + "' in '" + text + "'");
    }
  };
  if (name == "random") s.kind = PatternKind::random;
  else if (name == "checkerboard") s.kind = PatternKind::checkerboard;
  else if (name == "wave") s.kind = PatternKind::wave;
  else if (name == "stride") s.kind = PatternKind::stride;
  else if (name == "mix") s.kind = PatternKind::mix;
  else throw ConfigError("unknown coefficient pattern '" + name + "'");
  if (!args.empty()) {
    std::string a = args, b;
    if (auto pos = args.find(','); pos != std::string::npos) {
      a = args.substr(0, pos);
      b = args.substr(pos + 1);
    }
    switch (s.kind) {
      case PatternKind::checkerboard: s.period = static_cast<int>(num(a)); break;
      case PatternKind::wave:
        s.period = static_cast<int>(num(a));
        if (!b.empty()) s.amplitude = num(b);
        break;
      case PatternKind::stride: s.width = static_cast<int>(num(a)); break;
      default: throw ConfigError("pattern '" + name + "' takes no arguments");
    }
  }
  return s;
}

namespace detail {

inline void fill_checkerboard(CoefficientMap& m, int period) {
  if (period < 1 || period >= m.e) throw ConfigError("checkerboard period must be in [1, E)");
  for (int cy = 0; cy < m.e; ++cy)
    for (int cx = 0; cx < m.e; ++cx)
      m.at(cx, cy) = ((cx / period + cy / period) % 2 == 0) ? m.lo : m.hi;
}

// Horizontal bands of width `period`, displaced sideways by a sine wave with
// one full wavelength across the domain.
inline void fill_wave(CoefficientMap& m, int period, double amplitude) {
  if (period < 1 || period >= m.e) throw ConfigError("wave period must be in [1, E)");
  for (int cy = 0; cy < m.e; ++cy)
    for (int cx = 0; cx < m.e; ++cx) {
      double phase = cy + amplitude * std::sin(2.0 * M_PI * cx / static_cast<double>(m.e));
      long band = static_cast<long>(std::floor(phase / static_cast<double>(period)));
      m.at(cx, cy) = (((band % 2) + 2) % 2 == 0) ? m.lo : m.hi;
    }
}

inline void fill_stride(CoefficientMap& m, int width) {
  if (width < 1 || width >= m.e) throw ConfigError("stride width must be in [1, E)");
  for (int cy = 0; cy < m.e; ++cy)
    for (int cx = 0; cx < m.e; ++cx) m.at(cx, cy) = ((cx / width) % 2 == 0) ? m.lo : m.hi;
}

}  // namespace detail

inline CoefficientMap gen_coefficient(const PatternSpec& spec, int e, uint64_t seed,
                                      double lo = 1.0, double hi = 100.0) {
  if (e < 2) throw ConfigError("coefficient grid needs E >= 2");
  CoefficientMap m(e, lo);
  m.lo = lo;
  m.hi = hi;
  m.pattern = spec.str();
  m.seed = seed;
  switch (spec.kind) {
    case PatternKind::random: {
      Rng rng(derive_seed(seed, "coef.random"));
      for (double& v : m.v) v = rng.below(2) == 0 ? lo : hi;
      break;
    }
    case PatternKind::checkerboard:
      detail::fill_checkerboard(m, spec.period);
      break;
    case PatternKind::wave:
      detail::fill_wave(m, spec.period, spec.amplitude);
      break;
    case PatternKind::stride:
      detail::fill_stride(m, spec.width);
      break;
    case PatternKind::mix: {
      // Random rectangular partition into four quadrants, each filled from one
      // of the three deterministic constituents.
      CoefficientMap parts[3] = {CoefficientMap(e, lo), CoefficientMap(e, lo), CoefficientMap(e, lo)};
      for (auto& p : parts) { p.lo = lo; p.hi = hi; }
      detail::fill_checkerboard(parts[0], std::max(1, e / 8));
      detail::fill_wave(parts[1], std::max(1, e / 8), e / 10.0);
      detail::fill_stride(parts[2], std::max(1, e / 8));
      Rng rng(derive_seed(seed, "coef.mix"));
      int sx = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(e - 1)));
      int sy = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(e - 1)));
      int pick[4];
      for (int& p : pick) p = static_cast<int>(rng.below(3));
      for (int cy = 0; cy < e; ++cy)
        for (int cx = 0; cx < e; ++cx) {
          int quad = (cy < sy ? 0 : 2) + (cx < sx ? 0 : 1);
          m.at(cx, cy) = parts[pick[quad]].at(cx, cy);
        }
      break;
    }
  }
  m.validate();
  return m;
}

inline CoefficientMap gen_coefficient(const std::string& pattern, int e, uint64_t seed,
                                      double lo = 1.0, double hi = 100.0) {
  return gen_coefficient(parse_pattern(pattern), e, seed, lo, hi);
}

}  // namespace nhcsr
