#include "gibbslab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

Composition SpinSample::composition() const {
  std::vector<std::int64_t> counts(q, 0);
  for (std::int32_t s : spins) ++counts[s - 1];
  return Composition(std::move(counts));
}

namespace {

// Cumulative masses for inverse-CDF composition draws, forced to end at 1.
std::vector<double> cumulative(const LatticeDistribution& dist) {
  std::vector<double> cdf(dist.size());
  KahanSum acc;
  for (std::int64_t i = 0; i < dist.size(); ++i) {
    acc.add(dist.prob(i));
    cdf[i] = acc.value();
  }
  cdf.back() = 1.0;
  return cdf;
}

std::vector<std::int32_t> arrange(std::span<const std::int32_t> counts, Rng& rng) {
  std::vector<std::int32_t> spins;
  for (std::size_t k = 0; k < counts.size(); ++k)
    spins.insert(spins.end(), counts[k], std::int32_t(k + 1));
  // Fisher-Yates with the caller's stream.
  for (std::size_t i = spins.size(); i > 1; --i)
    std::swap(spins[i - 1], spins[rng.uniform_below(i)]);
  return spins;
}

}  // namespace

std::vector<SpinSample> sample_gibbs(const LatticeDistribution& dist, std::uint64_t seed,
                                     std::int64_t count) {
  if (count < 0) throw std::invalid_argument("sample_gibbs: negative count");
  const LatticeIndex& index = dist.index();
  std::vector<double> cdf = cumulative(dist);
  Rng root(seed);

  std::vector<SpinSample> out;
  out.reserve(count);
  for (std::int64_t s = 0; s < count; ++s) {
    Rng rng = root.split(std::uint64_t(s));
    double u = rng.uniform();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::int64_t i = it == cdf.end() ? index.size() - 1 : it - cdf.begin();
    out.push_back({arrange(index.counts(i), rng), index.q()});
  }
  return out;
}

std::vector<SpinSample> sample_mixture(const ModelAnalysis& analysis, std::int64_t n,
                                       const TruncationPolicy& policy, std::uint64_t seed,
                                       std::int64_t count) {
  if (count < 0) throw std::invalid_argument("sample_mixture: negative count");
  const int q = analysis.q();
  const double radius = policy.radius(n);
  const double sqrt_n = std::sqrt(double(n));

  // Positivity guard up front: the ball bounds each hat coordinate by the
  // radius and the completed q-th coordinate by sqrt(q-1) times it.
  for (const auto& profile : analysis.maximizers) {
    for (int k = 0; k < q - 1; ++k)
      if (!(profile.M[k] - radius / sqrt_n > 0.0))
        throw std::runtime_error("sample_mixture: positivity guard violated");
    if (!(profile.M[q - 1] - std::sqrt(double(q - 1)) * radius / sqrt_n > 0.0))
      throw std::runtime_error("sample_mixture: positivity guard violated");
  }

  std::vector<double> component_cdf;
  {
    KahanSum acc;
    for (const auto& profile : analysis.maximizers) {
      acc.add(profile.w / analysis.total_weight);
      component_cdf.push_back(acc.value());
    }
    component_cdf.back() = 1.0;
  }

  Rng root(seed);
  std::vector<SpinSample> out;
  out.reserve(count);
  std::vector<double> state_cdf(q);
  for (std::int64_t s = 0; s < count; ++s) {
    Rng rng = root.split(std::uint64_t(s));

    double u = rng.uniform();
    std::size_t j = std::lower_bound(component_cdf.begin(), component_cdf.end(), u) -
                    component_cdf.begin();
    if (j >= analysis.maximizers.size()) j = analysis.maximizers.size() - 1;
    const auto& profile = analysis.maximizers[j];

    // Mixing vector: Gaussian in the positive-eigenvalue subspace, zeroed
    // when it leaves the truncation ball.
    const int d = q - 1;
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(d);
    for (int a = 0; a < d; ++a) {
      double lambda = profile.sigma_eigenvalues[a];
      if (lambda > 0.0) xi += profile.sigma_eigenvectors.col(a) * (std::sqrt(lambda) * rng.normal());
    }
    if (xi.norm() > radius) xi.setZero();

    double tail = 0.0;
    for (int k = 0; k < d; ++k) tail += xi[k];
    KahanSum acc;
    for (int k = 0; k < q; ++k) {
      double p = k < d ? profile.M[k] + xi[k] / sqrt_n : profile.M[k] - tail / sqrt_n;
      acc.add(p);
      state_cdf[k] = acc.value();
    }
    state_cdf[q - 1] = 1.0;

    SpinSample sample;
    sample.q = q;
    sample.spins.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      double v = rng.uniform();
      int k = 0;
      while (k < q - 1 && v > state_cdf[k]) ++k;
      sample.spins[i] = k + 1;
    }
    out.push_back(std::move(sample));
  }
  return out;
}

ChiSquareResult chi_square_gof(const std::vector<SpinSample>& samples,
                               const LatticeDistribution& exact, double min_expected) {
  if (samples.empty()) throw std::invalid_argument("chi_square_gof: no samples");
  const LatticeIndex& index = exact.index();
  const double n_samples = double(samples.size());

  std::vector<std::int64_t> observed(index.size(), 0);
  for (const auto& sample : samples) {
    Composition c = sample.composition();
    if (c.n() != index.n() || c.q() != index.q())
      throw std::invalid_argument("chi_square_gof: sample shape mismatch");
    ++observed[index.rank(c.counts())];
  }

  ChiSquareResult result;
  double pooled_expected = 0.0;
  std::int64_t pooled_observed = 0;
  std::int64_t big_bins = 0;
  KahanSum stat;
  for (std::int64_t i = 0; i < index.size(); ++i) {
    double expected = exact.prob(i) * n_samples;
    if (expected < min_expected) {
      pooled_expected += expected;
      pooled_observed += observed[i];
      ++result.pooled_atoms;
    } else {
      double d = double(observed[i]) - expected;
      stat.add(d * d / expected);
      ++big_bins;
    }
  }
  std::int64_t bins = big_bins;
  if (pooled_expected > 0.0) {
    double d = double(pooled_observed) - pooled_expected;
    stat.add(d * d / pooled_expected);
    ++bins;
  }
  if (bins < 2) throw std::runtime_error("chi_square_gof: fewer than two usable bins");
  result.statistic = stat.value();
  result.df = bins - 1;
  result.p_value = chi_square_tail(result.statistic, double(result.df));
  return result;
}

}  // namespace gibbslab
