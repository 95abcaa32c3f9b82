#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace corpusforge {

/// xoshiro256** seeded through splitmix64. Spelled out here (rather than
/// std::mt19937 + <random> distributions) so that sampled corpora are
/// reproducible across standard library implementations.
class Xoshiro256 {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256ss-splitmix64-fisheryates-v1";

  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, bound) by rejection (no modulo bias). bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, 1) with 53 bits.
  double unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  /// Fisher-Yates, walking from the back.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Derives a 64-bit seed from a base seed and a text label (SHA-256 based).
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace corpusforge
