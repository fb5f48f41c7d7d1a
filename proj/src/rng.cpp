#include "tce/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "tce/error.hpp"

namespace tce {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : lineage_(seed) {
  std::uint64_t x = seed;
  for (auto& word : state_) {
    word = splitmix64(x);
  }
}

Rng Rng::split(std::uint64_t key) const {
  std::uint64_t x = lineage_ ^ std::rotl(key, 17);
  const std::uint64_t a = splitmix64(x);
  const std::uint64_t b = splitmix64(x);
  return Rng(a ^ std::rotl(b, 29) ^ key);
}

Rng Rng::split(std::string_view label) const { return split(fnv1a(label)); }

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  return result;
}

std::size_t Rng::uniform_int(std::size_t n) {
  require(n >= 1, "uniform_int requires n >= 1");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= limit) {
      return static_cast<std::size_t>(r % bound);
    }
  }
}

double Rng::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) {
    u1 = uniform01();
  }
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(theta);
  has_spare_ = true;
  return radius * std::cos(theta);
}

}  // namespace tce
