#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "gibbslab/free_energy.hpp"
#include "gibbslab/lattice.hpp"

namespace gibbslab {

/// Truncation of the mixing Gaussian: the vector is set to zero (not
/// conditioned) outside a Euclidean ball of radius radius(N), so the mass
/// that leaves the ball sits in an atom at zero. radius(N) = N^delta capped
/// at 0.5 sqrt(N) min_coordinate, which keeps every factor probability
/// strictly positive at small N and is inactive as N grows.
struct TruncationPolicy {
  double delta = 0.1;
  double min_coordinate = 1.0;

  TruncationPolicy(double delta, double min_coordinate);

  /// Policy tied to the maximizers of an analysis (positivity context).
  static TruncationPolicy for_analysis(double delta, const ModelAnalysis& analysis);

  double radius(std::int64_t n) const;

  /// Probability that the untruncated Gaussian N(0, Sigma) leaves the
  /// radius(N) ball. Zero-clamped eigenvalue directions carry no mass.
  double atom_mass(const Eigen::MatrixXd& sigma, std::int64_t n) const;
};

struct QuadratureConfig {
  int nodes_per_dim = 64;
  double target_tol = 1e-9;  // admissible normalization defect
};

namespace detail {

/// Quadrature discretization of a truncated Gaussian: nodes inside the ball
/// with Gaussian-mass weights, plus the leftover mass relocated to zero.
/// By construction weights + zero_mass = 1 exactly, so every measure built
/// from a node set is normalized up to floating-point accumulation.
struct MixingNodeSet {
  Eigen::MatrixXd points;       // d x n, original coordinates
  std::vector<double> weights;  // positive Gaussian-mass weights
  double zero_mass = 1.0;       // atom at the origin
};

MixingNodeSet build_mixing_nodes(const Eigen::MatrixXd& sigma, double radius,
                                 const QuadratureConfig& config);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace detail

/// E[f(xi)] for xi the truncated Gaussian: ball quadrature plus
/// zero_mass * f(0). Requires Sigma symmetric positive semidefinite.
double truncated_gaussian_expectation(const Eigen::MatrixXd& sigma, const TruncationPolicy& policy,
                                      std::int64_t n,
                                      const std::function<double(const Eigen::VectorXd&)>& f,
                                      const QuadratureConfig& config = {});

/// Pushforward of the mixture of product measures under the magnetization
/// map: nu(c) = (1/|w|) sum_j w_j binom(N; c) E_xi[prod_k (M_jk + xi_k /
/// sqrt(N))^{c_k}], with xi_q = -sum_{k<q} xi_k. The inner expectation is
/// evaluated against the node set in log space; the vector is renormalized
/// and the pre-normalization defect is recorded in log_norm (must be small,
/// the measure is a probability measure analytically).
LatticeDistribution mixture_pushforward(const ModelAnalysis& analysis, std::int64_t n,
                                        const TruncationPolicy& policy,
                                        const QuadratureConfig& config = {},
                                        std::int64_t entry_cap = LatticeIndex::kDefaultEntryCap);

/// Pushforward of the convex combination of plain product measures
/// (1/|w|) sum_j w_j Multinomial(k, M_j): the mixture with no mixing noise.
LatticeDistribution product_baseline(const ModelAnalysis& analysis, std::int64_t k,
                                     std::int64_t entry_cap = LatticeIndex::kDefaultEntryCap);

/// Critical q = 2 mixture at unit coupling and zero field: mixing variable
/// with quartic density f1(x) = exp(-x^4/12) / (12^{1/4} Gamma(1/4) / 2),
/// truncated at N^delta (delta < 1/20), injected at scale N^{1/4}.
LatticeDistribution critical_cw_pushforward(std::int64_t n, const TruncationPolicy& policy,
                                            const QuadratureConfig& config = {});

/// Normalizer of the quartic mixing density, 12^{1/4} Gamma(1/4) / 2.
double quartic_density_normalizer();

namespace detail {

/// Per-composition direct log-sum-exp evaluation (any q).
LatticeDistribution mixture_pushforward_direct(const ModelAnalysis& analysis, std::int64_t n,
                                               const TruncationPolicy& policy,
                                               const QuadratureConfig& config,
                                               std::int64_t entry_cap);

/// Blocked incremental evaluation for q = 3: per node the count exponent is
/// affine in (c_1, c_2), so along a c_2 row each node term updates by one
/// multiply. Block-local shifts keep everything inside double range.
LatticeDistribution mixture_pushforward_blocked_q3(const ModelAnalysis& analysis, std::int64_t n,
                                                   const TruncationPolicy& policy,
                                                   const QuadratureConfig& config,
                                                   std::int64_t entry_cap);

}  // namespace detail

}  // namespace gibbslab
