#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace sdors {

// splitmix64 (Steele/Lea/Flood constants). Pinned so that identical seeds
// reproduce identical instances and scenario matrices across builds.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97f4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1), 53-bit resolution
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform integer in {lo, ..., hi}
  int next_int(int lo, int hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next() % span);
  }

  double next_real(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Box-Muller, one value per call (pairs are not cached so that draws per
  // substream stay position-independent)
  double next_normal(double mean, double sd) {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    double u2 = next_unit();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + sd * z;
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic derivation of independent substreams: FNV-1a over the label,
// folded into the seed through two splitmix64 finalizer rounds.
inline std::uint64_t split_stream(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64_mix(splitmix64_mix(seed + 0x9E3779B97f4A7C15ULL) ^ h);
}

}  // namespace sdors
