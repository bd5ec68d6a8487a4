#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace negres {

/// Seeded 64-bit generator. Independent streams are derived from one root seed
/// by name, so changing how one component consumes randomness does not shift
/// the draws seen by another.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  /// Child generator whose seed depends only on this seed and `name`.
  Rng substream(std::string_view name) const;
  Rng substream(std::uint64_t index) const;

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace negres
