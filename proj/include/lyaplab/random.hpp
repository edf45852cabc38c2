#pragma once

#include <cstdint>

namespace lyaplab {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed for stream `index` of `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

/// Uniform in [0,1) as a pure function of (seed, signed index).
constexpr double counter_uniform(std::uint64_t seed, std::int64_t index) noexcept {
  const std::uint64_t h = mix64(seed ^ mix64(static_cast<std::uint64_t>(index)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Sequential draws from the counter-based stream of `seed`.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) noexcept : seed_(seed) {}
  double uniform() noexcept { return counter_uniform(seed_, next_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Integer in [0, n).
  std::int64_t below(std::int64_t n) noexcept {
    const auto v = static_cast<std::int64_t>(uniform() * static_cast<double>(n));
    return v < n ? v : n - 1;
  }

 private:
  std::uint64_t seed_;
  std::int64_t next_ = 0;
};

}  // namespace lyaplab
