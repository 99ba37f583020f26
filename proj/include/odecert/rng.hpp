#pragma once

#include <array>
#include <cstdint>

namespace odecert {

/// Source of random draws. Virtual so tests can force prescribed values.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  /// Uniform draw in [0, 1).
  virtual double uniform() = 0;

  /// Standard normal draw. Default implementation is a Box-Muller transform
  /// of two uniform() draws, so stubbing uniform() also controls normals.
  virtual double normal();
};

/// xoshiro256++ seeded through SplitMix64. Deterministic across platforms;
/// (seed, stream) pairs give statistically independent streams, so ensembles
/// derive stream k for trial k and stay reproducible under any scheduling.
class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform() override;

 private:
  std::array<std::uint64_t, 4> state_;
};

}  // namespace odecert
