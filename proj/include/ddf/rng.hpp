#pragma once

#include <cmath>
#include <cstdint>

namespace ddf {

/// Counter-friendly 64-bit generator (splitmix64). Used for every stochastic
/// path in the library so that results are reproducible across platforms and
/// independent of the standard library's distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in (0,1); never returns exactly 0 or 1.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

  /// Standard normal via Box-Muller (pair cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Derives an independent substream seed from a base seed and up to two
/// counters, e.g. component indices (q, r) of a mixture fusion.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  SplitMix64 g(base ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xd1b54a32d192ed03ULL));
  g.next();
  return g.next();
}

}  // namespace ddf
