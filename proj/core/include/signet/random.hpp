#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace signet {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Order-sensitive 64-bit hash combination.
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept;

/// FNV-1a over the bytes of a string.
std::uint64_t hash_string(std::string_view text) noexcept;

/// Child seed for (master, run, tag): insulates consumers from each other's draws.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t run, std::string_view tag) noexcept;

/// Seeded generator whose derived draws do not depend on the standard library's
/// distribution implementations, so sequences are reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace signet
