#pragma once

// Counter-based random numbers: every draw is a pure function of its key, so
// results do not depend on evaluation order or threading.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace aopkit::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a sequence of 64-bit words into one.
inline constexpr std::uint64_t hash(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = splitmix64(h ^ splitmix64(w));
  return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stream of draws under a fixed key; draw i is hash(key, i).
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) : key_(key) {}
  Stream(std::initializer_list<std::uint64_t> words) : key_(hash(words)) {}

  std::uint64_t next_bits() { return hash({key_, counter_++}); }
  double uniform() { return to_unit(next_bits()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [lo, hi].
  long uniform_int(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next_bits() % span);
  }
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace aopkit::rng
