#pragma once

// Standalone nodal-field container ("NHGF"), used for inference outputs:
// magic "NHGF" | u32 version=1 | u32 n | n*n f64 | trailing u32 CRC32.

#include <string>

#include "nhcsr/field.hpp"
#include "nhcsr/io.hpp"

namespace nhcsr {

inline void write_gridfile(const GridField& g, const std::string& path) {
  ByteWriter w;
  w.str("NHGF");
  w.u32(1);
  w.u32(static_cast<uint32_t>(g.n));
  for (double v : g.v) w.f64(v);
  w.u32(w.crc_from(0));
  write_file(path, w.data());
}

inline GridField read_gridfile(const std::string& path) {
  std::string bytes = read_file(path);
  if (bytes.size() < 8) throw IoError(path + ": not a field file (too short)");
  ByteReader r(bytes);
  if (r.raw(4) != "NHGF") throw IoError(path + ": not a field file (bad magic)");
  uint32_t version = r.u32();
  if (version != 1) throw IoError(path + ": unsupported field version " + std::to_string(version));
  uint32_t n = r.u32();
  if (n < 2 || n > (1u << 16)) throw IoError(path + ": implausible grid size");
  {
    ByteReader crc_r(bytes);
    uint32_t expect = crc_r.crc_range(0, bytes.size() - 4);
    ByteReader tail(std::string_view(bytes).substr(bytes.size() - 4));
    if (tail.u32() != expect) throw IoError(path + ": checksum mismatch");
  }
  GridField g(static_cast<int>(n));
  for (double& v : g.v) v = r.f64();
  r.u32();  // CRC verified above
  if (!r.at_end()) throw IoError(path + ": trailing bytes");
  return g;
}

}  // namespace nhcsr
