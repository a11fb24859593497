#pragma once

#include <cmath>
#include <cstdint>

namespace geoalign {

// Seedable 64-bit generator (splitmix64 update + finalizer). Pure integer
// arithmetic plus a fixed uint64 -> double conversion, so sequences do not
// depend on the platform or on any library distribution code.
//
// substream(i) derives an independent stream from (seed, i); generators that
// need one stream per point use it so results are independent of the order in
// which points are produced.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit mantissa.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Modulo bias is < n / 2^64, irrelevant at the sizes
  // used here; keeping it branch-free keeps the stream layout fixed.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  SplitMix64 substream(std::uint64_t i) const {
    return SplitMix64(mix(state_ + (i + 1) * 0xd1b54a32d192ed03ull));
  }

  // Standard normal via the Marsaglia polar method; the second draw of each
  // pair is cached. The method (not just the engine) is fixed so that any
  // reimplementation can reproduce the streams draw for draw.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace geoalign
