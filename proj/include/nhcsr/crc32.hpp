#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace nhcsr {

namespace detail {
inline constexpr std::array<uint32_t, 256> kCrc32Table = [] {
  std::array<uint32_t, 256> t{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    t[i] = c;
  }
  return t;
}();
}  // namespace detail

// CRC-32 (IEEE 802.3, same polynomial and conventions as zlib's crc32).
inline uint32_t crc32_update(uint32_t crc, const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  crc = ~crc;
  for (size_t i = 0; i < len; ++i) crc = detail::kCrc32Table[(crc ^ p[i]) & 0xffu] ^ (crc >> 8);
  return ~crc;
}

inline uint32_t crc32(const void* data, size_t len) { return crc32_update(0, data, len); }

inline uint32_t crc32(std::string_view bytes) { return crc32(bytes.data(), bytes.size()); }

}  // namespace nhcsr
