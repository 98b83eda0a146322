#pragma once

#include <cstdint>
#include <initializer_list>

namespace leibniz {

// SplitMix64 finalizer. Every stochastic decision in the simulator is a
// hash of (seed, edge, slot, seq, ...) so identical scenarios replay
// bit-identically on any platform.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_keys(std::initializer_list<uint64_t> keys) {
  uint64_t h = 0x8f1bbcdcbfa53e0bULL;
  for (uint64_t k : keys) h = mix64(h ^ k);
  return h;
}

// Uniform draw in [0, 1).
inline double unit_draw(std::initializer_list<uint64_t> keys) {
  return static_cast<double>(hash_keys(keys) >> 11) * 0x1.0p-53;
}

}  // namespace leibniz
