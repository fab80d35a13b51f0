#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <string_view>

#include "nhcsr/crc32.hpp"
#include "nhcsr/error.hpp"

namespace nhcsr {

// Little-endian byte stream builder. Bytes are composed explicitly so file
// formats are identical on any host.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

  void bytes(const void* data, size_t len) {
    buf_.append(static_cast<const char*>(data), len);
  }

  void str(std::string_view s) { buf_.append(s); }

  size_t size() const { return buf_.size(); }
  const std::string& data() const { return buf_; }

  uint32_t crc_from(size_t offset) const {
    return crc32(buf_.data() + offset, buf_.size() - offset);
  }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }

  uint32_t u32() {
    const char* p = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }

  uint64_t u64() {
    const char* p = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::string_view raw(size_t len) {
    const char* p = take(len);
    return std::string_view(p, len);
  }

  size_t pos() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  uint32_t crc_range(size_t begin, size_t end) const {
    return crc32(bytes_.data() + begin, end - begin);
  }

 private:
  const char* take(size_t len) {
    if (pos_ + len > bytes_.size()) throw IoError("truncated file: unexpected end of data");
    const char* p = bytes_.data() + pos_;
    pos_ += len;
    return p;
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure: " + path);
  return bytes;
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure: " + path);
}

}  // namespace nhcsr
