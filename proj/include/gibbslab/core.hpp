#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gibbslab {

/// A point of the probability simplex over q states. Coordinates are state
/// frequencies m_k >= 0 summing to one (absolute tolerance 1e-12).
class SimplexPoint {
 public:
  explicit SimplexPoint(std::vector<double> probs);

  /// Builds the full point from the first q-1 coordinates, m_q = 1 - |hat|.
  static SimplexPoint from_hat(const Eigen::VectorXd& hat);

  const std::vector<double>& probs() const { return probs_; }
  double operator[](int k) const { return probs_[k]; }
  int q() const { return static_cast<int>(probs_.size()); }

  /// First q-1 coordinates.
  std::span<const double> hat() const { return {probs_.data(), probs_.size() - 1}; }
  Eigen::VectorXd hat_vector() const;

 private:
  std::vector<double> probs_;
};

/// Integer state counts of an N-spin configuration; counts sum to N exactly.
class Composition {
 public:
  explicit Composition(std::vector<std::int64_t> counts);

  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t operator[](int k) const { return counts_[k]; }
  std::int64_t n() const { return n_; }
  int q() const { return static_cast<int>(counts_.size()); }

  SimplexPoint to_simplex() const;

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t n_;
};

/// Entropy -sum m_k log m_k with the 0 log 0 = 0 convention. Range [0, log q].
double ent(const SimplexPoint& m);

/// log of the multinomial coefficient N! / prod(c_k!), via log-gamma.
double log_multinomial(const Composition& c);
double log_multinomial(std::span<const std::int64_t> counts);
double log_multinomial(std::span<const std::int32_t> counts);

/// Interaction evaluation bundle: F on the full simplex plus analytic
/// gradient and Hessian in the first q-1 (hat) coordinates.
struct Interaction {
  std::function<double(const SimplexPoint&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_hat;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_hat;
};

struct ModelSpec {
  int q = 2;
  Interaction interaction;
  std::string label;
  std::map<std::string, double> params;
};

/// Built-in models by name.
///
/// curie_weiss: q = 2 with F(m) = (beta/2)(1 - 2 mhat)^2 + h (1 - 2 mhat),
/// where mhat = m_1 is the fraction of -1 spins; the scalar magnetization is
/// the view mtilde = 1 - 2 mhat. Requires beta >= 0, h >= 0.
///
/// potts: q >= 2 with F(m) = (beta/2) sum_k m_k^2. This is the standard
/// mean-field form; it is a convention, not forced by anything upstream.
ModelSpec builtin_model(const std::string& name, const std::map<std::string, double>& params);

ModelSpec curie_weiss(double beta, double h = 0.0);
ModelSpec potts(int q, double beta);

/// q = 2 magnetization view: fraction(+1) - fraction(-1).
inline double cw_magnetization(double mhat) { return 1.0 - 2.0 * mhat; }

}  // namespace gibbslab
