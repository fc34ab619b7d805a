#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace psa {

/// xoshiro256** with its state expanded from a single 64-bit seed through
/// splitmix64. Every random decision in the toolkit (splits, weight init,
/// epoch shuffles) draws from this generator, so results are reproducible
/// across platforms and standard-library implementations.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next(); }
  result_type next() noexcept;

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 bits of mantissa.
  double uniform01() noexcept;

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

 private:
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives an independent stream seed, e.g. for epoch shuffling vs. init.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Fisher-Yates, walking from the back: for i = n-1 .. 1 swap(i, below(i+1)).
template <typename T>
void fisher_yates(std::span<T> items, Xoshiro256& rng) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    using std::swap;
    swap(items[i], items[j]);
  }
}

}  // namespace psa
