#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "lmdp/types.hpp"

namespace lmdp {

/// SplitMix64 finalizer; bijective 64-bit mixer used for key derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic splittable random stream.
///
/// A stream is identified by a 64-bit key.  `child(i)` derives an
/// independent subordinate stream from (key, i) without consuming state, so
/// the draw sequence of any component is a pure function of its path in the
/// derivation tree (run -> episode -> step), independent of how many draws
/// sibling components made.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), gen_(mix64(mix64(key))) {}

  /// Derive the i-th subordinate stream.  Pure: does not advance this stream.
  [[nodiscard]] RngStream child(std::uint64_t i) const {
    return RngStream(mix64(key_ + 0x9E3779B97F4A7C15ULL * (i + 1)));
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Sample an index from an (approximately normalized) probability vector by
  /// walking the CDF.  Entries must be non-negative; the walk is locked to a
  /// fixed traversal order so results are identical across platforms.
  Index categorical(const Vec& probs) {
    const double u = uniform01() * probs.sum();
    double acc = 0.0;
    Index last_positive = 0;
    for (Index i = 0; i < probs.size(); ++i) {
      if (probs[i] > 0.0) last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
    return last_positive;  // guard against accumulated rounding
  }

  /// Uniform integer in {0, ..., n-1}.
  Index uniform_index(Index n) {
    return std::min<Index>(static_cast<Index>(uniform01() * static_cast<double>(n)), n - 1);
  }

  /// Standard normal via Marsaglia polar method (platform-stable).
  double normal() {
    for (;;) {
      const double a = 2.0 * uniform01() - 1.0;
      const double b = 2.0 * uniform01() - 1.0;
      const double s = a * a + b * b;
      if (s > 0.0 && s < 1.0) return a * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  /// Exponential(1) draw.
  double exponential() {
    double u;
    do { u = uniform01(); } while (u <= 0.0);
    return -std::log1p(-u);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::uint64_t key_;
  std::mt19937_64 gen_;
};

}  // namespace lmdp
