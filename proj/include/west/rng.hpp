#pragma once

#include <cstdint>
#include <string_view>

// Fixed 64-bit generator (splitmix64). All randomness in the toolkit flows
// from one master seed through named sub-streams so components reproduce
// bit-identically on any platform; std::random distributions are avoided
// because their streams are implementation-defined.

namespace west {

struct SplitMix64 {
  std::uint64_t s;

  explicit SplitMix64(std::uint64_t seed) : s(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, bound) via rejection on a power-of-two mask
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t mask = bound - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < bound) return v;
    }
  }

  // uniform in [0, 1) with 53 random bits
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // uniform in (-range, range)
  double uniform_sym(double range) { return (2.0 * uniform() - 1.0) * range; }
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return g.next();
}

inline std::uint64_t sub_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL; // fnv1a-64
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return mix_seed(master, h);
}

} // namespace west
