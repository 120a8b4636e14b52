#include "gibbslab/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

namespace {

bool strictly_interior(const Eigen::VectorXd& mhat) {
  double tail = 1.0 - mhat.sum();
  if (!(tail > 0.0) || !(tail < 1.0)) return false;
  for (Eigen::Index i = 0; i < mhat.size(); ++i)
    if (!(mhat[i] > 0.0) || !(mhat[i] < 1.0)) return false;
  return true;
}

void require_interior(const ModelSpec& model, const Eigen::VectorXd& mhat) {
  if (mhat.size() != model.q - 1)
    throw std::invalid_argument("free energy: hat point has wrong dimension");
  if (!strictly_interior(mhat))
    throw std::domain_error("free energy: point is not strictly interior");
}

}  // namespace

double ModelAnalysis::min_coordinate() const {
  double m = 1.0;
  for (const auto& profile : maximizers)
    for (double p : profile.M.probs()) m = std::min(m, p);
  return m;
}

double g_value(const ModelSpec& model, const Eigen::VectorXd& mhat) {
  require_interior(model, mhat);
  SimplexPoint m = SimplexPoint::from_hat(mhat);
  return model.interaction.value(m) + ent(m);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> g_grad_hess(const ModelSpec& model,
                                                        const Eigen::VectorXd& mhat) {
  require_interior(model, mhat);
  int d = model.q - 1;
  double mq = 1.0 - mhat.sum();
  Eigen::VectorXd grad = model.interaction.grad_hat(mhat);
  Eigen::MatrixXd hess = model.interaction.hess_hat(mhat);
  for (int i = 0; i < d; ++i) {
    grad[i] += std::log(mq / mhat[i]);
    for (int j = 0; j < d; ++j) hess(i, j) -= 1.0 / mq;
    hess(i, i) -= 1.0 / mhat[i];
  }
  return {std::move(grad), std::move(hess)};
}

namespace {

struct Candidate {
  Eigen::VectorXd point;
  double value;
};

// Damped Newton ascent on G from one start. Returns true on convergence.
bool newton_ascend(const ModelSpec& model, Eigen::VectorXd& x, double& value, double tol,
                   int max_iterations) {
  const double interior_eps = 1e-9;
  value = g_value(model, x);
  for (int iter = 0; iter < max_iterations; ++iter) {
    auto [grad, hess] = g_grad_hess(model, x);
    if (grad.norm() <= tol) return true;

    // Ascent direction from the (ridged) negated Hessian.
    Eigen::MatrixXd neg_hess = -hess;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(neg_hess);
    double lambda_min = es.eigenvalues().minCoeff();
    double ridge = lambda_min > 1e-10 ? 0.0 : (1e-10 - lambda_min);
    Eigen::VectorXd dir =
        es.eigenvectors() *
        ((es.eigenvalues().array() + ridge).inverse() * (es.eigenvectors().transpose() * grad).array())
            .matrix();

    // Shrink the step so every coordinate stays inside the simplex.
    double t = 1.0;
    auto admissible = [&](double step) {
      Eigen::VectorXd y = x + step * dir;
      if (1.0 - y.sum() <= interior_eps) return false;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        if (y[i] <= interior_eps) return false;
      return true;
    };
    while (t > 1e-14 && !admissible(t)) t *= 0.5;

    // Backtrack until G strictly increases.
    bool moved = false;
    while (t > 1e-14) {
      Eigen::VectorXd y = x + t * dir;
      double gy = g_value(model, y);
      if (gy > value) {
        x = std::move(y);
        value = gy;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      auto [g2, h2] = g_grad_hess(model, x);
      return g2.norm() <= std::max(tol, 1e-9 * (1.0 + std::abs(value)));
    }
  }
  auto [grad, hess] = g_grad_hess(model, x);
  return grad.norm() <= tol;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

ModelAnalysis find_maximizers(const ModelSpec& model, int grid_n, double tol,
                              const MaximizerSearchOptions& options) {
  if (grid_n < 8) throw std::invalid_argument("find_maximizers: grid_n must be at least 8");
  if (!(tol > 0.0)) throw std::invalid_argument("find_maximizers: tol must be positive");
  int d = model.q - 1;

  // Regular interior grid in hat coordinates.
  std::vector<Candidate> grid;
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd x(d);
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
      x[i] = (idx[i] + 0.5) / grid_n;
      sum += x[i];
    }
    if (1.0 - sum > 0.25 / grid_n) grid.push_back({x, g_value(model, x)});
    int i = d - 1;
    while (i >= 0 && ++idx[i] == grid_n) idx[i--] = 0;
    if (i < 0) break;
  }
  if (grid.empty()) throw std::runtime_error("find_maximizers: empty interior grid");

  std::sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return lex_less(a.point, b.point);
  });
  std::size_t n_starts =
      std::min(grid.size(), std::max<std::size_t>(4, (grid.size() + 19) / 20));

  std::vector<Candidate> converged;
  for (std::size_t s = 0; s < n_starts; ++s) {
    Eigen::VectorXd x = grid[s].point;
    double value = 0.0;
    if (newton_ascend(model, x, value, tol, options.max_iterations))
      converged.push_back({std::move(x), value});
  }
  if (converged.empty())
    throw std::runtime_error("find_maximizers: no start converged within the iteration cap");

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : converged) best = std::max(best, c.value);
  double tie_window = options.tie_tolerance * (1.0 + std::abs(best));

  std::vector<Candidate> global;
  for (auto& c : converged)
    if (best - c.value <= tie_window) global.push_back(std::move(c));
  std::sort(global.begin(), global.end(), [](const Candidate& a, const Candidate& b) {
    return lex_less(a.point, b.point);
  });

  // Merge duplicates; keep the highest-value representative of each cluster.
  std::vector<Candidate> merged;
  for (auto& c : global) {
    bool absorbed = false;
    for (auto& m : merged) {
      if ((m.point - c.point).norm() <= options.merge_radius) {
        if (c.value > m.value) m = c;
        absorbed = true;
        break;
      }
    }
    if (!absorbed) merged.push_back(c);
  }

  ModelAnalysis analysis;
  analysis.model = model;
  analysis.sup_g = best;
  for (const auto& c : merged) {
    SimplexPoint m = SimplexPoint::from_hat(c.point);
    double min_coord = *std::min_element(m.probs().begin(), m.probs().end());
    if (min_coord <= options.interior_floor)
      throw std::runtime_error("find_maximizers: maximizer on the simplex boundary");

    auto [grad, hess] = g_grad_hess(model, c.point);
    Eigen::MatrixXd h_matrix = -hess;
    h_matrix = 0.5 * (h_matrix + h_matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_h(h_matrix);
    if (es_h.eigenvalues().minCoeff() <= options.hessian_floor)
      throw std::runtime_error("find_maximizers: degenerate Hessian at a maximizer");

    MaximizerProfile profile{SimplexPoint(m.probs()), h_matrix, 0.0, {}, {}, {}};

    double det_h = es_h.eigenvalues().prod();
    double prod_m = 1.0;
    for (double p : m.probs()) prod_m *= p;
    profile.w = 1.0 / std::sqrt(det_h * prod_m);

    Eigen::MatrixXd h_inv = es_h.eigenvectors() *
                            es_h.eigenvalues().cwiseInverse().asDiagonal() *
                            es_h.eigenvectors().transpose();
    Eigen::VectorXd mhat = c.point;
    Eigen::MatrixXd sigma = h_inv;
    sigma -= Eigen::MatrixXd(mhat.asDiagonal());
    sigma += mhat * mhat.transpose();
    sigma = 0.5 * (sigma + sigma.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_s(sigma);
    if (es_s.eigenvalues().minCoeff() < -1e-10)
      throw std::runtime_error("find_maximizers: mixing covariance has a negative eigenvalue");
    profile.Sigma = sigma;
    profile.sigma_eigenvalues = es_s.eigenvalues().cwiseMax(0.0);
    profile.sigma_eigenvectors = es_s.eigenvectors();

    analysis.maximizers.push_back(std::move(profile));
  }

  KahanSum total;
  for (const auto& p : analysis.maximizers) total.add(p.w);
  analysis.total_weight = total.value();
  if (!(analysis.total_weight > 0.0))
    throw std::runtime_error("find_maximizers: nonpositive total weight");
  return analysis;
}

double rate_function(const ModelAnalysis& analysis, const Eigen::VectorXd& mhat) {
  double value = analysis.sup_g - g_value(analysis.model, mhat);
  return std::max(value, 0.0);
}

double laplace_log_z(const ModelAnalysis& analysis, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("laplace_log_z: N must be positive");
  return double(n) * analysis.sup_g + std::log(analysis.total_weight);
}

}  // namespace gibbslab
