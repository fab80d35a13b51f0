#pragma once

// Paired coarse/fine solution dataset ("NHCD" container).
//
// Layout (little-endian):
//   magic "NHCD" | u32 version=1 | u32 n_samples | u32 E | u32 H | u32 alpha
//   u32 source tag | f64 source value | f64 y_min | f64 y_max
//   per sample: E*E u8 mask (0 -> lo, 1 -> hi) | (H+1)^2 f64 X | (aH+1)^2 f64 Y
//               | u32 CRC32 of that sample's bytes

#include <cstdint>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nhcsr/coefficients.hpp"
#include "nhcsr/fem.hpp"
#include "nhcsr/io.hpp"
#include "nhcsr/rng.hpp"

namespace nhcsr {

constexpr double kCoefLo = 1.0;
constexpr double kCoefHi = 100.0;

struct DatasetSample {
  std::vector<uint8_t> mask;  // E*E, 0 -> lo, 1 -> hi
  std::vector<double> x;      // (H+1)^2 coarse solution
  std::vector<double> y;      // (alpha*H+1)^2 fine solution

  CoefficientMap coefficient(int e) const {
    CoefficientMap m(e, kCoefLo);
    m.hi = kCoefHi;
    for (size_t i = 0; i < mask.size(); ++i) m.v[i] = mask[i] ? kCoefHi : kCoefLo;
    return m;
  }
  GridField coarse(int h) const {
    GridField g(h + 1);
    g.v = x;
    return g;
  }
  GridField fine(int h, int alpha) const {
    GridField g(alpha * h + 1);
    g.v = y;
    return g;
  }
};

struct Dataset {
  uint32_t e = 0, h = 0, alpha = 0;
  SourceSpec source;
  double y_min = 0.0, y_max = 0.0;
  std::vector<DatasetSample> samples;

  int coarse_nodes() const { return static_cast<int>(h) + 1; }
  int fine_nodes() const { return static_cast<int>(alpha * h) + 1; }
};

inline void write_dataset(const Dataset& ds, const std::string& path) {
  ByteWriter w;
  w.str("NHCD");
  w.u32(1);
  w.u32(static_cast<uint32_t>(ds.samples.size()));
  w.u32(ds.e);
  w.u32(ds.h);
  w.u32(ds.alpha);
  w.u32(ds.source.tag);
  w.f64(ds.source.value);
  w.f64(ds.y_min);
  w.f64(ds.y_max);
  const size_t nx = static_cast<size_t>(ds.coarse_nodes()) * ds.coarse_nodes();
  const size_t ny = static_cast<size_t>(ds.fine_nodes()) * ds.fine_nodes();
  for (const DatasetSample& s : ds.samples) {
    if (s.mask.size() != static_cast<size_t>(ds.e) * ds.e || s.x.size() != nx || s.y.size() != ny)
      throw ContractError("write_dataset: sample arrays inconsistent with header");
    size_t start = w.size();
    w.bytes(s.mask.data(), s.mask.size());
    for (double v : s.x) w.f64(v);
    for (double v : s.y) w.f64(v);
    w.u32(w.crc_from(start));
  }
  write_file(path, w.data());
}

inline Dataset read_dataset(const std::string& path) {
  std::string bytes = read_file(path);
  ByteReader r(bytes);
  if (r.remaining() < 4 || r.raw(4) != "NHCD")
    throw IoError(path + ": not a dataset file (bad magic)");
  uint32_t version = r.u32();
  if (version != 1) throw IoError(path + ": unsupported dataset version " + std::to_string(version));
  Dataset ds;
  uint32_t n = r.u32();
  ds.e = r.u32();
  ds.h = r.u32();
  ds.alpha = r.u32();
  ds.source.tag = r.u32();
  ds.source.value = r.f64();
  ds.y_min = r.f64();
  ds.y_max = r.f64();
  if (ds.e < 2 || ds.h < 2 || ds.alpha < 1) throw IoError(path + ": implausible dataset header");
  const size_t nx = static_cast<size_t>(ds.coarse_nodes()) * ds.coarse_nodes();
  const size_t ny = static_cast<size_t>(ds.fine_nodes()) * ds.fine_nodes();
  ds.samples.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    DatasetSample& s = ds.samples[i];
    size_t start = r.pos();
    std::string_view mask = r.raw(static_cast<size_t>(ds.e) * ds.e);
    s.mask.assign(mask.begin(), mask.end());
    s.x.resize(nx);
    for (double& v : s.x) v = r.f64();
    s.y.resize(ny);
    for (double& v : s.y) v = r.f64();
    uint32_t expect = r.crc_range(start, r.pos());
    uint32_t stored = r.u32();
    if (stored != expect)
      throw IoError(path + ": checksum mismatch in sample " + std::to_string(i));
  }
  if (!r.at_end()) throw IoError(path + ": trailing bytes after last sample");
  return ds;
}

struct BuildConfig {
  int n_samples = 0;
  int e = 32;
  int h = 8;
  int alpha = 2;
  PatternSpec pattern;
  uint64_t seed = 0;
  SourceSpec source;
};

// Solves each sample's problem at resolutions H (-> X) and alpha*H (-> Y) with
// the same coefficient map and source. Samples are independent; generation is
// parallel with per-sample derived seeds, output ordered by sample index.
inline Dataset build_dataset(const BuildConfig& cfg) {
  if (cfg.n_samples < 0) throw ConfigError("build_dataset: negative sample count");
  if (cfg.alpha < 1) throw ConfigError("build_dataset: alpha must be >= 1");
  Dataset ds;
  ds.e = static_cast<uint32_t>(cfg.e);
  ds.h = static_cast<uint32_t>(cfg.h);
  ds.alpha = static_cast<uint32_t>(cfg.alpha);
  ds.source = cfg.source;
  ds.samples.resize(static_cast<size_t>(cfg.n_samples));

  // Validate grid compatibility up front (cheap, clearer than failing mid-run).
  {
    CoefficientMap probe(cfg.e, kCoefLo);
    FemProblem p{probe, cfg.h, cfg.source.fn()};
    assemble_stiffness(p);
    p.h_cells = cfg.alpha * cfg.h;
    assemble_stiffness(p);
  }

  std::string first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < cfg.n_samples; ++i) {
    try {
      uint64_t si = derive_seed(cfg.seed, "sample", static_cast<uint64_t>(i));
      CoefficientMap a = gen_coefficient(cfg.pattern, cfg.e, si, kCoefLo, kCoefHi);
      FemProblem prob{a, cfg.h, cfg.source.fn()};
      GridField x = fem_solve(prob);
      prob.h_cells = cfg.alpha * cfg.h;
      GridField y = fem_solve(prob);
      DatasetSample& s = ds.samples[static_cast<size_t>(i)];
      s.mask.resize(a.v.size());
      for (size_t j = 0; j < a.v.size(); ++j) s.mask[j] = a.v[j] == kCoefHi ? 1 : 0;
      s.x = std::move(x.v);
      s.y = std::move(y.v);
    } catch (const std::exception& ex) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (first_error.empty()) first_error = ex.what();
    }
  }
  if (!first_error.empty()) throw NumericError("build_dataset: " + first_error);

  ds.y_min = 0.0;
  ds.y_max = 0.0;
  bool first = true;
  for (const DatasetSample& s : ds.samples)
    for (double v : s.y) {
      if (first) {
        ds.y_min = ds.y_max = v;
        first = false;
      } else {
        ds.y_min = std::min(ds.y_min, v);
        ds.y_max = std::max(ds.y_max, v);
      }
    }
  return ds;
}

}  // namespace nhcsr
