#pragma once

// Counter-based random streams.
//
// A stream is a 64-bit key; its k-th output is mix64(key + (k + 1) * kGolden),
// where mix64 is the SplitMix64 finalizer. Any output can be computed
// directly from (key, k), so trials keyed by (master seed, trial index) give
// the same numbers regardless of execution order.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace k3dyn {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key of the independent stream number `index` under `master`.
constexpr std::uint64_t stream_key(std::uint64_t master, std::uint64_t index) {
  return mix64(master ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t counter_output(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGolden);
}

// 53-bit uniform in [0, 1).
constexpr double to_unit(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return counter_output(key_, counter_++); }

  double uniform() { return to_unit((*this)()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes two outputs.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace k3dyn
