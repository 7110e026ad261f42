#pragma once

#include <cmath>
#include <cstdint>

#include "taillight/common.hpp"

namespace taillight {

/// splitmix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b ^ 0x632be59bd9b4e019ULL));
}

inline constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b,
                                        std::uint64_t c) {
  return mix_keys(mix_keys(a, b), c);
}

inline constexpr std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b,
                                        std::uint64_t c, std::uint64_t d) {
  return mix_keys(mix_keys(a, b, c), d);
}

/// Counter-based generator: the whole stream is a pure function of the
/// key, so independent consumers can derive disjoint sub-streams with
/// mix_keys and never touch shared state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n). Multiply-shift; bias is < n / 2^64.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform integer in [lo, hi], inclusive.
  int next_int(int lo, int hi) {
    return lo + static_cast<int>(next_below(
                    static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Standard normal via Box-Muller; generates in pairs.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    u2 = next_double();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(6.283185307179586477 * u2);
    has_spare_ = true;
    return mag * std::cos(6.283185307179586477 * u2);
  }

  /// Poisson sample by Knuth's product method. Rates are expected to be
  /// small (shot noise tops out around 60); throws past the range where
  /// exp(-rate) stays representable.
  long long next_poisson(double rate) {
    if (rate <= 0.0) return 0;
    if (rate > 600.0) throw NumericError("poisson rate too large");
    const double limit = std::exp(-rate);
    long long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= next_double();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace taillight
