#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "strkern/errors.hpp"

namespace strkern::binary {

// Little-endian primitives shared by the binary artifact formats.

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    buf[k] = static_cast<unsigned char>((static_cast<std::uint64_t>(value) >> (8 * k)) & 0xFF);
  }
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  static_assert(std::is_integral_v<T>);
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw format_error("truncated file");
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return static_cast<T>(v);
}

inline void put_f64(std::ostream& out, double value) {
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(value));
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

inline void put_string(std::ostream& out, const std::string& s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
  const auto len = get_le<std::uint32_t>(in);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw format_error("truncated string");
  return s;
}

inline void put_magic(std::ostream& out, const char (&magic)[5], std::uint32_t version) {
  out.write(magic, 4);
  put_le<std::uint32_t>(out, version);
}

inline void expect_magic(std::istream& in, const char (&magic)[5], std::uint32_t version) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
    throw format_error(std::string("bad magic, expected ") + magic);
  }
  const auto v = get_le<std::uint32_t>(in);
  if (v != version) {
    throw format_error(std::string(magic) + ": unsupported version " + std::to_string(v));
  }
}

}  // namespace strkern::binary
