#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hotspot {

using Rng = std::mt19937_64;

/// FNV-1a over the stream name, mixed with the seed through splitmix64. Gives
/// independent, reproducible generators per (seed, purpose) pair.
inline Rng make_rng(std::uint64_t seed, std::string_view stream = {}) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : stream) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  return Rng(z);
}

}  // namespace hotspot
