#pragma once

#include <cstdint>

namespace gibbslab {

/// Small self-contained generator (xoshiro256++ seeded through splitmix64).
/// Deterministic across platforms and runs for a given seed; split() derives
/// independent child streams, so work chunked over streams is reproducible
/// regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on (0, 1].
  double uniform();

  /// Uniform integer in [0, bound).
  std::uint64_t uniform_below(std::uint64_t bound);

  /// Standard normal via Box-Muller (pair cached).
  double normal();

  /// Child stream derived from the root seed and a stream id.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace gibbslab
