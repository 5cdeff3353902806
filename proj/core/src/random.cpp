#include "hbs/random.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include "hbs/error.hpp"

namespace hbs {

__extension__ typedef unsigned __int128 u128;


std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
  u128 m =
      static_cast<u128>((*this)()) * static_cast<u128>(bound);
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * static_cast<u128>(bound);
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double CounterRng::normal() noexcept {
  // u1 in (0, 1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::student_t(int dof) noexcept {
  const double z = normal();
  double chi2 = 0.0;
  for (int i = 0; i < dof; ++i) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = CounterRng::mix(seed ^ 0x6A09E667F3BCC909ULL);
  for (const std::uint64_t t : tags) {
    h = CounterRng::mix(h + 0x9E3779B97F4A7C15ULL + CounterRng::mix(t));
  }
  return h;
}

std::uint64_t tag(std::string_view label) noexcept {
  // FNV-1a
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<std::size_t> sample_without_replacement(
    std::span<const std::size_t> population, std::size_t count,
    CounterRng& rng) {
  if (count > population.size()) {
    throw InvalidConfig("sample_without_replacement: count exceeds population");
  }
  std::vector<std::size_t> pool(population.begin(), population.end());
  const std::size_t size = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t count,
                                                    CounterRng& rng) {
  std::vector<std::size_t> population(n);
  std::iota(population.begin(), population.end(), std::size_t{0});
  return sample_without_replacement(population, count, rng);
}

}  // namespace hbs
