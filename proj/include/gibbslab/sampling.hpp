#pragma once

#include <cstdint>
#include <vector>

#include "gibbslab/free_energy.hpp"
#include "gibbslab/lattice.hpp"
#include "gibbslab/mixture.hpp"
#include "gibbslab/rng.hpp"

namespace gibbslab {

/// One spin configuration; states are labels in {1, ..., q}.
struct SpinSample {
  std::vector<std::int32_t> spins;
  int q = 2;

  Composition composition() const;
};

/// Exact sampler for any lattice distribution: inverse-CDF draw of a
/// composition followed by a uniformly random arrangement. Exchangeability
/// makes composition-then-shuffle exact; there is no chain to mix.
std::vector<SpinSample> sample_gibbs(const LatticeDistribution& dist, std::uint64_t seed,
                                     std::int64_t count);

/// Sampler for the mixture of product measures: pick a component j with
/// probability w_j/|w|, draw the mixing vector (zeroed outside the
/// truncation ball), then N iid spins with state probabilities
/// M_j + xi/sqrt(N).
std::vector<SpinSample> sample_mixture(const ModelAnalysis& analysis, std::int64_t n,
                                       const TruncationPolicy& policy, std::uint64_t seed,
                                       std::int64_t count);

struct ChiSquareResult {
  double statistic = 0.0;
  std::int64_t df = 0;
  double p_value = 1.0;
  std::int64_t pooled_atoms = 0;  // low-expectation atoms merged into one bin
};

/// Chi-square goodness of fit of sampled compositions against an exact
/// lattice law. Atoms with expected count below min_expected are pooled.
ChiSquareResult chi_square_gof(const std::vector<SpinSample>& samples,
                               const LatticeDistribution& exact, double min_expected = 5.0);

}  // namespace gibbslab
