#pragma once

#include <cmath>
#include <cstdint>

namespace stochlat {

// Deterministic 64-bit generator (splitmix64 core). The point of rolling our
// own instead of using <random> is bit-for-bit portability: results must not
// depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(scramble(seed)) {}

  // Decorrelated substream: same (seed, index) always yields the same stream,
  // distinct indices give independent-looking streams. Used to make per-item
  // randomness (one stream per snapshot, per checkpoint, ...) order-free.
  static Rng stream(uint64_t seed, uint64_t index) {
    Rng r(0);
    r.state_ = scramble(scramble(seed) + 0x9E3779B97F4A7C15ull * (index + 1));
    return r;
  }

  uint64_t next_bits() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random mantissa bits.
  double uniform() { return static_cast<double>(next_bits() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. The pair's second value is cached, so
  // draws come in deterministic pairs.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n). Rejection-free modulo is fine here: n is tiny
  // compared to 2^64, bias is unmeasurable for our uses (shuffles, subsets).
  uint64_t below(uint64_t n) { return next_bits() % n; }

 private:
  static uint64_t scramble(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace stochlat
