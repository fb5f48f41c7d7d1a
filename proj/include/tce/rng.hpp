#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace tce {

/// xoshiro256** generator seeded through splitmix64.
///
/// Every draw is computed with integer arithmetic or IEEE-754 basic operations
/// plus std::log/std::sqrt/std::cos, so a seed reproduces the same stream on any
/// conforming platform. The standard <random> distributions are avoided because
/// their output is implementation-defined.
///
/// split() derives a child stream from the seed lineage only, never from the
/// current state: the child for a given key is the same no matter how many
/// values the parent has already produced.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  Rng split(std::uint64_t key) const;
  Rng split(std::string_view label) const;

  std::uint64_t next_u64() noexcept;

  /// Uniform over {0, ..., n-1}; rejection sampling keeps it unbiased.
  std::size_t uniform_int(std::size_t n);
  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_int(i)]);
    }
  }

  std::uint64_t lineage() const noexcept { return lineage_; }

private:
  std::uint64_t lineage_;
  std::uint64_t state_[4];
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tce
