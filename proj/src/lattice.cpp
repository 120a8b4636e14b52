#include "gibbslab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

LatticeIndex::LatticeIndex(std::int64_t n, int q, std::int64_t entry_cap) : n_(n), q_(q) {
  if (n < 1) throw std::invalid_argument("LatticeIndex: N must be positive");
  if (q < 2) throw std::invalid_argument("LatticeIndex: q must be at least 2");
  size_ = composition_count(n, q);
  if (size_ > entry_cap)
    throw std::runtime_error("LatticeIndex: lattice size " + std::to_string(size_) +
                             " exceeds the entry cap " + std::to_string(entry_cap));
  if (n > std::numeric_limits<std::int32_t>::max())
    throw std::invalid_argument("LatticeIndex: N too large for count storage");

  storage_.resize(static_cast<std::size_t>(size_) * q_);
  // Ascending lexicographic order of the first q-1 counts; last count fills.
  std::vector<std::int32_t> c(q_, 0);
  c[q_ - 1] = static_cast<std::int32_t>(n);
  std::int64_t written = 0;
  while (true) {
    std::copy(c.begin(), c.end(), storage_.begin() + written * q_);
    ++written;
    // Next composition: increment the deepest incrementable hat coordinate.
    int i = q_ - 2;
    while (i >= 0 && c[q_ - 1] == 0) {
      c[q_ - 1] += c[i];
      c[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++c[i];
    --c[q_ - 1];
  }
  if (written != size_) throw std::logic_error("LatticeIndex: enumeration incomplete");
}

Composition LatticeIndex::composition(std::int64_t i) const {
  auto span = counts(i);
  return Composition(std::vector<std::int64_t>(span.begin(), span.end()));
}

std::int64_t LatticeIndex::rank(std::span<const std::int64_t> counts) const {
  if (static_cast<int>(counts.size()) != q_)
    throw std::invalid_argument("LatticeIndex::rank: wrong number of parts");
  std::int64_t rank = 0;
  std::int64_t remaining = n_;
  for (int i = 0; i + 1 < q_; ++i) {
    for (std::int64_t v = 0; v < counts[i]; ++v)
      rank += composition_count(remaining - v, q_ - i - 1);
    remaining -= counts[i];
    if (remaining < 0) throw std::invalid_argument("LatticeIndex::rank: counts exceed N");
  }
  if (remaining != counts[q_ - 1])
    throw std::invalid_argument("LatticeIndex::rank: counts do not sum to N");
  return rank;
}

LatticeIndexPtr enumerate_lattice(std::int64_t n, int q, std::int64_t entry_cap) {
  return std::make_shared<const LatticeIndex>(n, q, entry_cap);
}

LatticeDistribution::LatticeDistribution(LatticeIndexPtr index, std::vector<double> log_probs,
                                         double log_norm)
    : index_(std::move(index)), log_probs_(std::move(log_probs)), log_norm_(log_norm) {
  if (!index_) throw std::invalid_argument("LatticeDistribution: null index");
  if (static_cast<std::int64_t>(log_probs_.size()) != index_->size())
    throw std::invalid_argument("LatticeDistribution: size mismatch with index");
  double lse = log_sum_exp(log_probs_);
  if (std::abs(lse) > 1e-10)
    throw std::invalid_argument("LatticeDistribution: log mass off unity by " +
                                std::to_string(lse));
}

double LatticeDistribution::normalization_defect() const {
  return std::abs(std::expm1(log_norm_));
}

GibbsResult gibbs_pushforward(const ModelSpec& model, std::int64_t n, std::int64_t entry_cap) {
  LatticeIndexPtr index = enumerate_lattice(n, model.q, entry_cap);
  const std::int64_t size = index->size();
  LogFactorials lf(n);

  std::vector<double> lw(size);
  std::vector<double> probs(model.q);
  for (std::int64_t i = 0; i < size; ++i) {
    auto c = index->counts(i);
    double lm = lf(n);
    for (int k = 0; k < model.q; ++k) {
      lm -= lf(c[k]);
      probs[k] = static_cast<double>(c[k]) / static_cast<double>(n);
    }
    double f = model.interaction.value(SimplexPoint(probs));
    if (!std::isfinite(f))
      throw std::runtime_error("gibbs_pushforward: interaction is not finite on the lattice");
    lw[i] = lm + double(n) * f;
  }

  double log_z = log_sum_exp(lw);
  for (double& x : lw) x -= log_z;
  return {LatticeDistribution(std::move(index), std::move(lw), log_z), log_z};
}

GibbsResult brute_force_gibbs(const ModelSpec& model, std::int64_t n) {
  const int q = model.q;
  double configs = std::pow(double(q), double(n));
  if (configs > 1e7)
    throw std::invalid_argument("brute_force_gibbs: q^N exceeds the enumeration cap");

  LatticeIndexPtr index = enumerate_lattice(n, q);
  const std::int64_t size = index->size();

  // Count configurations per composition by enumerating all q^N assignments.
  std::vector<std::int64_t> occupancy(size, 0);
  std::vector<std::int32_t> spin(n, 0);
  std::vector<std::int64_t> counts(q, 0);
  while (true) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::int64_t i = 0; i < n; ++i) ++counts[spin[i]];
    ++occupancy[index->rank(counts)];
    std::int64_t i = n - 1;
    while (i >= 0 && ++spin[i] == q) spin[i--] = 0;
    if (i < 0) break;
  }

  std::vector<double> lw(size);
  std::vector<double> probs(q);
  for (std::int64_t i = 0; i < size; ++i) {
    auto c = index->counts(i);
    for (int k = 0; k < q; ++k) probs[k] = static_cast<double>(c[k]) / static_cast<double>(n);
    double f = model.interaction.value(SimplexPoint(probs));
    lw[i] = std::log(static_cast<double>(occupancy[i])) + double(n) * f;
  }

  double log_z = log_sum_exp(lw);
  for (double& x : lw) x -= log_z;
  return {LatticeDistribution(std::move(index), std::move(lw), log_z), log_z};
}

LatticeDistribution marginal_counts(const LatticeDistribution& dist, std::int64_t k) {
  const LatticeIndex& full = dist.index();
  const std::int64_t n = full.n();
  const int q = full.q();
  if (k < 1 || k > n) throw std::invalid_argument("marginal_counts: k out of range");

  LatticeIndexPtr index_k = enumerate_lattice(k, q);
  LogFactorials lf(n);
  const double log_choose_nk = lf.log_choose(n, k);

  std::vector<double> out(index_k->size());
  for (std::int64_t b = 0; b < index_k->size(); ++b) {
    auto bc = index_k->counts(b);
    // Online log-sum-exp over the full lattice, index order.
    double running_max = -std::numeric_limits<double>::infinity();
    double running_sum = 0.0;
    for (std::int64_t i = 0; i < full.size(); ++i) {
      double lp = dist.log_prob(i);
      if (lp == -std::numeric_limits<double>::infinity()) continue;
      auto c = full.counts(i);
      double term = lp - log_choose_nk;
      bool feasible = true;
      for (int j = 0; j < q; ++j) {
        if (c[j] < bc[j]) {
          feasible = false;
          break;
        }
        term += lf.log_choose(c[j], bc[j]);
      }
      if (!feasible) continue;
      if (term > running_max) {
        running_sum = running_sum * std::exp(running_max - term) + 1.0;
        running_max = term;
      } else {
        running_sum += std::exp(term - running_max);
      }
    }
    out[b] = running_max + std::log(running_sum);
  }

  double lse = log_sum_exp(out);
  for (double& x : out) x -= lse;
  return LatticeDistribution(std::move(index_k), std::move(out), lse);
}

Moments moments(const LatticeDistribution& dist) {
  const LatticeIndex& index = dist.index();
  const int d = index.q() - 1;
  const double n = static_cast<double>(index.n());

  std::vector<KahanSum> mean_acc(d);
  std::vector<KahanSum> second_acc(d * d);
  for (std::int64_t i = 0; i < index.size(); ++i) {
    double p = dist.prob(i);
    if (p == 0.0) continue;
    auto c = index.counts(i);
    for (int a = 0; a < d; ++a) {
      double xa = c[a] / n;
      mean_acc[a].add(p * xa);
      for (int b = 0; b < d; ++b) second_acc[a * d + b].add(p * xa * (c[b] / n));
    }
  }

  Moments m;
  m.mean.resize(d);
  m.covariance.resize(d, d);
  for (int a = 0; a < d; ++a) m.mean[a] = mean_acc[a].value();
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      m.covariance(a, b) = second_acc[a * d + b].value() - m.mean[a] * m.mean[b];
  return m;
}

std::pair<double, double> magnetization_moments(const LatticeDistribution& dist) {
  if (dist.index().q() != 2)
    throw std::invalid_argument("magnetization_moments: requires q = 2");
  Moments m = moments(dist);
  return {cw_magnetization(m.mean[0]), 4.0 * m.covariance(0, 0)};
}

}  // namespace gibbslab
