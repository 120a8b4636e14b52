#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "gibbslab/core.hpp"

namespace gibbslab {

/// One interior global maximizer M of G = F + ent together with everything
/// the product-mixture construction needs: the negated Hessian H = -Hess G(M),
/// the weight w = (det(H) prod_k M_k)^(-1/2), and the mixing covariance
/// Sigma = H^{-1} - diag(Mhat) + Mhat Mhat^T with its spectral factorization
/// (eigenvalues clamped at zero).
struct MaximizerProfile {
  SimplexPoint M;
  Eigen::MatrixXd H;
  double w = 0.0;
  Eigen::MatrixXd Sigma;
  Eigen::VectorXd sigma_eigenvalues;
  Eigen::MatrixXd sigma_eigenvectors;  // columns, aligned with eigenvalues
};

struct ModelAnalysis {
  ModelSpec model;
  std::vector<MaximizerProfile> maximizers;
  double sup_g = 0.0;
  double total_weight = 0.0;

  int q() const { return model.q; }
  int num_maximizers() const { return static_cast<int>(maximizers.size()); }
  /// Smallest state probability over all maximizers (positivity context).
  double min_coordinate() const;
};

/// G(mhat) = F(m) + ent(m) with m = (mhat, 1 - |mhat|). Interior only.
double g_value(const ModelSpec& model, const Eigen::VectorXd& mhat);

/// Analytic gradient and Hessian of G in hat coordinates; the entropy part
/// contributes grad_i = log(m_q / m_i) and hess_ij = -delta_ij / m_i - 1/m_q.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> g_grad_hess(const ModelSpec& model,
                                                        const Eigen::VectorXd& mhat);

struct MaximizerSearchOptions {
  double merge_radius = 1e-5;    // cluster radius for duplicate maximizers
  double tie_tolerance = 1e-8;   // relative window for "global" ties
  int max_iterations = 200;      // Newton iteration cap per start
  double hessian_floor = 1e-6;   // smallest eigenvalue of H before the
                                 // non-degeneracy check fails
  double interior_floor = 1e-7;  // smallest admissible state probability
};

/// Multi-start maximizer search: evaluate G on a regular interior grid with
/// grid_n points per hat dimension, run damped Newton ascent from the top 5%
/// of grid cells, converge to gradient norm <= tol, merge within
/// merge_radius and keep only global ties. Fails loudly when a survivor is
/// non-interior or has a (near-)singular Hessian.
ModelAnalysis find_maximizers(const ModelSpec& model, int grid_n = 64, double tol = 1e-10,
                              const MaximizerSearchOptions& options = {});

/// Large-deviation rate function I(m) = sup G - G(mhat) >= 0.
double rate_function(const ModelAnalysis& analysis, const Eigen::VectorXd& mhat);

/// Second-order asymptotic of the log partition function:
/// N sup G + log(sum_j w_j).
double laplace_log_z(const ModelAnalysis& analysis, std::int64_t n);

}  // namespace gibbslab
