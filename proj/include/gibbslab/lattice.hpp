#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "gibbslab/core.hpp"

namespace gibbslab {

/// Complete ordered enumeration of the simplex lattice: all compositions of
/// N into q nonnegative parts, in ascending lexicographic order of the
/// leading q-1 counts ((0,..,N) first, (N,..,0) last). Size C(N+q-1, q-1).
class LatticeIndex {
 public:
  static constexpr std::int64_t kDefaultEntryCap = 20'000'000;

  LatticeIndex(std::int64_t n, int q, std::int64_t entry_cap = kDefaultEntryCap);

  std::int64_t n() const { return n_; }
  int q() const { return q_; }
  std::int64_t size() const { return size_; }

  std::span<const std::int32_t> counts(std::int64_t i) const {
    return {storage_.data() + i * q_, static_cast<std::size_t>(q_)};
  }
  Composition composition(std::int64_t i) const;

  /// Flat index of a composition under the enumeration order.
  std::int64_t rank(std::span<const std::int64_t> counts) const;

  bool same_shape(const LatticeIndex& other) const { return n_ == other.n_ && q_ == other.q_; }

 private:
  std::int64_t n_;
  int q_;
  std::int64_t size_;
  std::vector<std::int32_t> storage_;
};

using LatticeIndexPtr = std::shared_ptr<const LatticeIndex>;

LatticeIndexPtr enumerate_lattice(std::int64_t n, int q,
                                  std::int64_t entry_cap = LatticeIndex::kDefaultEntryCap);

/// Probability vector over a simplex lattice, kept in log space.
/// log_norm records the log normalizer that was actually subtracted.
class LatticeDistribution {
 public:
  LatticeDistribution(LatticeIndexPtr index, std::vector<double> log_probs, double log_norm);

  const LatticeIndex& index() const { return *index_; }
  const LatticeIndexPtr& index_ptr() const { return index_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  double log_prob(std::int64_t i) const { return log_probs_[i]; }
  double prob(std::int64_t i) const { return std::exp(log_probs_[i]); }
  double log_norm() const { return log_norm_; }
  std::int64_t size() const { return index_->size(); }

  /// |exp(log_norm) - 1|: how far the raw vector was from unit mass.
  double normalization_defect() const;

 private:
  LatticeIndexPtr index_;
  std::vector<double> log_probs_;
  double log_norm_;
};

struct GibbsResult {
  LatticeDistribution dist;
  double log_z;
};

/// Pushforward of the Gibbs measure under the magnetization map: weight per
/// composition is log_multinomial(c) + N F(c/N), normalized by log Z.
GibbsResult gibbs_pushforward(const ModelSpec& model, std::int64_t n,
                              std::int64_t entry_cap = LatticeIndex::kDefaultEntryCap);

/// Direct configuration-space sum over all q^N spin assignments, aggregated
/// by composition. Oracle for gibbs_pushforward; requires q^N <= 1e7.
GibbsResult brute_force_gibbs(const ModelSpec& model, std::int64_t n);

/// Law of the state counts of a uniformly chosen size-k sub-block
/// (multivariate hypergeometric mixing over the full distribution).
LatticeDistribution marginal_counts(const LatticeDistribution& dist, std::int64_t k);

struct Moments {
  Eigen::VectorXd mean;        // of mhat, q-1 entries
  Eigen::MatrixXd covariance;  // of mhat
};

Moments moments(const LatticeDistribution& dist);

/// q = 2 helper: mean and variance of the magnetization mtilde = 1 - 2 mhat.
std::pair<double, double> magnetization_moments(const LatticeDistribution& dist);

}  // namespace gibbslab
