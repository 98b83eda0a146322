#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace leibniz {

// 64-bit FNV-1a. Non-cryptographic; the protocol treats digest equality as
// payload identity, which is adequate at simulation scale and swappable.
inline uint64_t digest64(std::string_view payload) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string digest_hex(uint64_t d) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(d));
  return std::string(buf);
}

}  // namespace leibniz
