#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace strkern {

/// 64-bit FNV-1a over length-prefixed fields.
class Fingerprint {
 public:
  Fingerprint& add(std::string_view s) {
    const std::uint64_t n = s.size();
    for (int k = 0; k < 8; ++k) byte(static_cast<unsigned char>((n >> (8 * k)) & 0xFF));
    for (unsigned char c : s) byte(c);
    return *this;
  }
  Fingerprint& add_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) byte(p[i]);
    return *this;
  }

  std::uint64_t value() const noexcept { return h_; }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  void byte(unsigned char c) noexcept {
    h_ ^= c;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace strkern
