#include "gibbslab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"
#include "parallel.hpp"

namespace gibbslab {

namespace {

constexpr double kDefectLimit = 1e-6;

// Per-component quadrature data: every node (atom included as the last row)
// carries a mass weight and the log state-probability vector of the product
// measure it mixes in.
struct ComponentTable {
  std::vector<double> log_weight;   // log of node mass x component weight share
  Eigen::MatrixXd log_state_probs;  // nodes x q
};

ComponentTable component_table(const MaximizerProfile& profile, double log_component_weight,
                               std::int64_t n, double radius, const QuadratureConfig& config) {
  const int q = profile.M.q();
  auto nodes = detail::build_mixing_nodes(profile.Sigma, radius, config);
  const Eigen::Index n_nodes = nodes.points.cols();
  const double sqrt_n = std::sqrt(double(n));

  ComponentTable table;
  std::int64_t rows = n_nodes + (nodes.zero_mass > 0.0 ? 1 : 0);
  table.log_state_probs.resize(rows, q);
  table.log_weight.reserve(rows);

  for (Eigen::Index i = 0; i < n_nodes; ++i) {
    double tail = 0.0;
    for (int k = 0; k < q - 1; ++k) {
      double p = profile.M[k] + nodes.points(k, i) / sqrt_n;
      tail += nodes.points(k, i);
      if (!(p > 0.0))
        throw std::runtime_error("mixture: positivity guard violated (N too small for delta)");
      table.log_state_probs(i, k) = std::log(p);
    }
    double pq = profile.M[q - 1] - tail / sqrt_n;
    if (!(pq > 0.0))
      throw std::runtime_error("mixture: positivity guard violated (N too small for delta)");
    table.log_state_probs(i, q - 1) = std::log(pq);
    table.log_weight.push_back(std::log(nodes.weights[i]) + log_component_weight);
  }
  if (nodes.zero_mass > 0.0) {
    for (int k = 0; k < q; ++k) table.log_state_probs(n_nodes, k) = std::log(profile.M[k]);
    table.log_weight.push_back(std::log(nodes.zero_mass) + log_component_weight);
  }
  return table;
}

std::vector<ComponentTable> all_component_tables(const ModelAnalysis& analysis, std::int64_t n,
                                                 const TruncationPolicy& policy,
                                                 const QuadratureConfig& config) {
  double radius = policy.radius(n);
  std::vector<ComponentTable> tables;
  tables.reserve(analysis.maximizers.size());
  for (const auto& profile : analysis.maximizers) {
    double share = std::log(profile.w) - std::log(analysis.total_weight);
    tables.push_back(component_table(profile, share, n, radius, config));
  }
  return tables;
}

LatticeDistribution finalize(LatticeIndexPtr index, std::vector<double> log_raw) {
  double total = log_sum_exp(log_raw);
  if (std::abs(std::expm1(total)) > kDefectLimit)
    throw std::runtime_error("mixture: quadrature normalization defect above threshold");
  for (double& x : log_raw) x -= total;
  return LatticeDistribution(std::move(index), std::move(log_raw), total);
}

}  // namespace

namespace detail {

LatticeDistribution mixture_pushforward_direct(const ModelAnalysis& analysis, std::int64_t n,
                                               const TruncationPolicy& policy,
                                               const QuadratureConfig& config,
                                               std::int64_t entry_cap) {
  const int q = analysis.q();
  auto tables = all_component_tables(analysis, n, policy, config);
  LatticeIndexPtr index = enumerate_lattice(n, q, entry_cap);
  LogFactorials lf(n);

  std::vector<double> log_raw(index->size());
  detail::parallel_for(index->size(), [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      auto c = index->counts(i);
      double lm = lf(n);
      for (int k = 0; k < q; ++k) lm -= lf(c[k]);

      // log sum over components and nodes of weight * prod_k p_k^{c_k}.
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& table : tables) {
        for (Eigen::Index r = 0; r < table.log_state_probs.rows(); ++r) {
          double s = table.log_weight[r];
          for (int k = 0; k < q; ++k) s += double(c[k]) * table.log_state_probs(r, k);
          if (s > best) best = s;
        }
      }
      KahanSum acc;
      for (const auto& table : tables) {
        for (Eigen::Index r = 0; r < table.log_state_probs.rows(); ++r) {
          double s = table.log_weight[r];
          for (int k = 0; k < q; ++k) s += double(c[k]) * table.log_state_probs(r, k);
          acc.add(std::exp(s - best));
        }
      }
      log_raw[i] = lm + best + std::log(acc.value());
    }
  });
  return finalize(std::move(index), std::move(log_raw));
}

LatticeDistribution mixture_pushforward_blocked_q3(const ModelAnalysis& analysis, std::int64_t n,
                                                   const TruncationPolicy& policy,
                                                   const QuadratureConfig& config,
                                                   std::int64_t entry_cap) {
  if (analysis.q() != 3)
    throw std::invalid_argument("mixture (blocked): only q = 3 is supported");
  auto tables = all_component_tables(analysis, n, policy, config);
  LatticeIndexPtr index = enumerate_lattice(n, 3, entry_cap);
  LogFactorials lf(n);

  // Flatten all components into one node list; the count exponent of node r
  // at composition (c1, c2, N - c1 - c2) is affine:
  //   s_r(c1, c2) = logw_r + N L2_r + c1 (L0_r - L2_r) + c2 (L1_r - L2_r).
  std::int64_t total_nodes = 0;
  for (const auto& t : tables) total_nodes += t.log_state_probs.rows();
  std::vector<double> base(total_nodes), alpha(total_nodes), beta(total_nodes), growth(total_nodes);
  {
    std::int64_t r = 0;
    for (const auto& t : tables) {
      for (Eigen::Index i = 0; i < t.log_state_probs.rows(); ++i, ++r) {
        base[r] = t.log_weight[i] + double(n) * t.log_state_probs(i, 2);
        alpha[r] = t.log_state_probs(i, 0) - t.log_state_probs(i, 2);
        beta[r] = t.log_state_probs(i, 1) - t.log_state_probs(i, 2);
        growth[r] = std::exp(beta[r]);
      }
    }
  }
  double beta_max = 1e-12;
  for (double b : beta) beta_max = std::max(beta_max, std::abs(b));
  const std::int64_t block = std::clamp<std::int64_t>(std::int64_t(600.0 / beta_max), 16, 1 << 14);

  std::vector<double> log_raw(index->size());
  detail::parallel_for(n + 1, [&](std::int64_t row_begin, std::int64_t row_end) {
    std::vector<double> s(total_nodes), t(total_nodes);
    for (std::int64_t c1 = row_begin; c1 < row_end; ++c1) {
      // Flat index of (c1, 0, N - c1) in lex order.
      std::int64_t offset = c1 * (n + 2) - c1 * (c1 + 1) / 2;
      std::int64_t row_len = n - c1 + 1;
      for (std::int64_t b0 = 0; b0 < row_len; b0 += block) {
        std::int64_t len = std::min(block, row_len - b0);
        double shift = -std::numeric_limits<double>::infinity();
        for (std::int64_t r = 0; r < total_nodes; ++r) {
          s[r] = base[r] + double(c1) * alpha[r] + double(b0) * beta[r];
          if (s[r] > shift) shift = s[r];
        }
        for (std::int64_t r = 0; r < total_nodes; ++r) t[r] = std::exp(s[r] - shift);
        for (std::int64_t j = 0; j < len; ++j) {
          double acc = 0.0;
          for (std::int64_t r = 0; r < total_nodes; ++r) acc += t[r];
          std::int64_t c2 = b0 + j;
          if (acc > 0.0) {
            log_raw[offset + c2] = shift + std::log(acc);
          } else {
            // All terms underflowed; redo this entry with its own shift.
            double best = -std::numeric_limits<double>::infinity();
            for (std::int64_t r = 0; r < total_nodes; ++r)
              best = std::max(best, base[r] + double(c1) * alpha[r] + double(c2) * beta[r]);
            KahanSum k2;
            for (std::int64_t r = 0; r < total_nodes; ++r)
              k2.add(std::exp(base[r] + double(c1) * alpha[r] + double(c2) * beta[r] - best));
            log_raw[offset + c2] = best + std::log(k2.value());
          }
          if (j + 1 < len)
            for (std::int64_t r = 0; r < total_nodes; ++r) t[r] *= growth[r];
        }
      }
      // Multinomial prefix for the whole row.
      for (std::int64_t c2 = 0; c2 < row_len; ++c2) {
        std::int64_t c3 = n - c1 - c2;
        log_raw[offset + c2] += lf(n) - lf(c1) - lf(c2) - lf(c3);
      }
    }
  });
  return finalize(std::move(index), std::move(log_raw));
}

}  // namespace detail

LatticeDistribution mixture_pushforward(const ModelAnalysis& analysis, std::int64_t n,
                                        const TruncationPolicy& policy,
                                        const QuadratureConfig& config, std::int64_t entry_cap) {
  if (n < 1) throw std::invalid_argument("mixture_pushforward: N must be positive");
  std::int64_t lattice_size = composition_count(n, analysis.q());
  std::int64_t nodes = std::int64_t(config.nodes_per_dim);
  int d = analysis.q() - 1;
  std::int64_t node_estimate = 1;
  for (int i = 0; i < d; ++i) node_estimate *= nodes;
  if (analysis.q() == 3 && lattice_size * node_estimate > 30'000'000)
    return detail::mixture_pushforward_blocked_q3(analysis, n, policy, config, entry_cap);
  return detail::mixture_pushforward_direct(analysis, n, policy, config, entry_cap);
}

LatticeDistribution product_baseline(const ModelAnalysis& analysis, std::int64_t k,
                                     std::int64_t entry_cap) {
  if (k < 1) throw std::invalid_argument("product_baseline: k must be positive");
  const int q = analysis.q();
  LatticeIndexPtr index = enumerate_lattice(k, q, entry_cap);
  LogFactorials lf(k);

  std::vector<std::vector<double>> log_m;
  std::vector<double> log_share;
  for (const auto& profile : analysis.maximizers) {
    std::vector<double> lm(q);
    for (int s = 0; s < q; ++s) lm[s] = std::log(profile.M[s]);
    log_m.push_back(std::move(lm));
    log_share.push_back(std::log(profile.w) - std::log(analysis.total_weight));
  }

  std::vector<double> log_raw(index->size());
  std::vector<double> terms(analysis.maximizers.size());
  for (std::int64_t i = 0; i < index->size(); ++i) {
    auto c = index->counts(i);
    double lmult = lf(k);
    for (int s = 0; s < q; ++s) lmult -= lf(c[s]);
    for (std::size_t j = 0; j < log_m.size(); ++j) {
      double t = log_share[j];
      for (int s = 0; s < q; ++s) t += double(c[s]) * log_m[j][s];
      terms[j] = t;
    }
    log_raw[i] = lmult + log_sum_exp(terms);
  }
  double lse = log_sum_exp(log_raw);
  for (double& x : log_raw) x -= lse;
  return LatticeDistribution(std::move(index), std::move(log_raw), lse);
}

LatticeDistribution critical_cw_pushforward(std::int64_t n, const TruncationPolicy& policy,
                                            const QuadratureConfig& config) {
  if (n < 2) throw std::invalid_argument("critical mixture: N must be at least 2");
  if (!(policy.delta < 1.0 / 20.0))
    throw std::invalid_argument("critical mixture: delta must be below 1/20");
  const double radius = std::pow(double(n), policy.delta);
  const double scale = std::pow(double(n), 0.25);
  if (!(radius / scale < 1.0))
    throw std::runtime_error("critical mixture: truncation radius reaches the unit scale");

  // Quartic mixing density f1(x) = exp(-x^4/12) / normalizer on [-radius, radius],
  // leftover mass in the atom at zero. The window never needs to extend past
  // the point where the density is ~1e-21.
  const double z1 = quartic_density_normalizer();
  const double a = std::min(radius, 5.0);
  std::vector<double> gl_nodes, gl_weights;
  detail::gauss_legendre(config.nodes_per_dim, gl_nodes, gl_weights);

  const int n_nodes = config.nodes_per_dim;
  std::vector<double> log_weight;
  Eigen::MatrixXd log_state(n_nodes + 1, 2);
  KahanSum mass;
  for (int i = 0; i < n_nodes; ++i) {
    double x = a * gl_nodes[i];
    double w = gl_weights[i] * a * std::exp(-x * x * x * x / 12.0) / z1;
    mass.add(w);
    log_weight.push_back(std::log(w));
    // State 1 holds the -1 spins; positive x tilts toward +1.
    log_state(i, 0) = std::log(0.5 * (1.0 - x / scale));
    log_state(i, 1) = std::log(0.5 * (1.0 + x / scale));
  }
  double total = mass.value();
  if (total > 1.0 + config.target_tol)
    throw std::runtime_error("critical mixture: quadrature defect above target_tol");
  double zero_mass = std::max(0.0, 1.0 - total);
  log_state(n_nodes, 0) = std::log(0.5);
  log_state(n_nodes, 1) = std::log(0.5);
  log_weight.push_back(zero_mass > 0.0 ? std::log(zero_mass)
                                       : -std::numeric_limits<double>::infinity());

  LatticeIndexPtr index = enumerate_lattice(n, 2);
  LogFactorials lf(n);
  std::vector<double> log_raw(index->size());
  std::vector<double> terms(n_nodes + 1);
  for (std::int64_t i = 0; i < index->size(); ++i) {
    auto c = index->counts(i);
    for (int r = 0; r <= n_nodes; ++r)
      terms[r] = log_weight[r] + double(c[0]) * log_state(r, 0) + double(c[1]) * log_state(r, 1);
    log_raw[i] = lf(n) - lf(c[0]) - lf(c[1]) + log_sum_exp(terms);
  }
  return finalize(std::move(index), std::move(log_raw));
}

}  // namespace gibbslab
