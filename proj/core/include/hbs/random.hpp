#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace hbs {

/// Counter-based generator: the i-th output is a SplitMix64 finalizer applied
/// to key + i * golden-gamma. Output depends only on (key, counter), so a
/// stream is fully described by its key and streams never share state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return mix(key_ + (++counter_) * kGamma); }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0. Lemire's multiply-shift with
  /// rejection, so the result is exact and platform independent.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal draw (Box-Muller, one variate per call).
  double normal() noexcept;

  /// Student-t draw with integer degrees of freedom.
  double student_t(int dof) noexcept;

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Derive a child stream key from a parent seed and a sequence of tags.
/// derive_seed(s, {a, b}) != derive_seed(s, {b, a}).
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> tags) noexcept;

/// Hash of a short label, for use as a stream tag.
std::uint64_t tag(std::string_view label) noexcept;

/// Draws `count` distinct elements of `population` by a partial Fisher-Yates
/// shuffle, in draw order. Requires count <= population.size().
std::vector<std::size_t> sample_without_replacement(
    std::span<const std::size_t> population, std::size_t count,
    CounterRng& rng);

/// Same as above over the population 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t count,
                                                    CounterRng& rng);

}  // namespace hbs
