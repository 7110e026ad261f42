#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "taillight/common.hpp"

namespace taillight {

/// Little-endian binary writer for the model/array file formats.
class BinWriter {
 public:
  explicit BinWriter(const std::filesystem::path& path)
      : out_(path, std::ios::binary), path_(path.string()) {
    if (!out_) throw DataError("cannot open for writing: " + path_);
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw DataError("write failed: " + path_);
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u16(std::uint16_t v) { put_le(v); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(bits);
  }
  void magic(const char tag[4]) { bytes(tag, 4); }
  /// u16 length followed by the raw bytes.
  void str(const std::string& s) {
    if (s.size() > 0xffff) throw DataError("string too long: " + path_);
    u16(static_cast<std::uint16_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  template <typename T>
  void put_le(T v) {
    std::uint8_t buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i)
      buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
    bytes(buf, sizeof(T));
  }

  std::ofstream out_;
  std::string path_;
};

class BinReader {
 public:
  explicit BinReader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw DataError("cannot open for reading: " + path_);
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw DataError("unexpected end of file: " + path_);
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint16_t u16() { return get_le<std::uint16_t>(); }
  std::uint32_t u32() { return get_le<std::uint32_t>(); }
  std::uint64_t u64() { return get_le<std::uint64_t>(); }
  float f32() {
    std::uint32_t bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    std::uint64_t bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  void expect_magic(const char tag[4], const char* what) {
    char buf[4];
    bytes(buf, 4);
    if (std::memcmp(buf, tag, 4) != 0)
      throw DataError(std::string("bad magic, not a ") + what + " file: " +
                      path_);
  }
  std::string str() {
    std::uint16_t n = u16();
    std::string s(n, '\0');
    if (n) bytes(s.data(), n);
    return s;
  }
  bool at_eof() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  template <typename T>
  T get_le() {
    std::uint8_t buf[sizeof(T)];
    bytes(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  std::ifstream in_;
  std::string path_;
};

}  // namespace taillight
