#include "gibbslab/core.hpp"

#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

namespace {
constexpr double kSimplexSumTol = 1e-12;
}

SimplexPoint::SimplexPoint(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw std::invalid_argument("SimplexPoint: need q >= 2 coordinates");
  KahanSum sum;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw std::invalid_argument("SimplexPoint: negative coordinate");
    sum.add(p);
  }
  if (std::abs(sum.value() - 1.0) > kSimplexSumTol)
    throw std::invalid_argument("SimplexPoint: coordinates do not sum to one");
}

SimplexPoint SimplexPoint::from_hat(const Eigen::VectorXd& hat) {
  std::vector<double> probs(hat.size() + 1);
  KahanSum sum;
  for (Eigen::Index i = 0; i < hat.size(); ++i) {
    probs[i] = hat[i];
    sum.add(hat[i]);
  }
  probs.back() = 1.0 - sum.value();
  return SimplexPoint(std::move(probs));
}

Eigen::VectorXd SimplexPoint::hat_vector() const {
  Eigen::VectorXd v(q() - 1);
  for (int i = 0; i + 1 < q(); ++i) v[i] = probs_[i];
  return v;
}

Composition::Composition(std::vector<std::int64_t> counts) : counts_(std::move(counts)), n_(0) {
  if (counts_.size() < 2) throw std::invalid_argument("Composition: need q >= 2 parts");
  for (std::int64_t c : counts_) {
    if (c < 0) throw std::invalid_argument("Composition: negative count");
    n_ += c;
  }
  if (n_ <= 0) throw std::invalid_argument("Composition: empty configuration");
}

SimplexPoint Composition::to_simplex() const {
  std::vector<double> probs(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k)
    probs[k] = static_cast<double>(counts_[k]) / static_cast<double>(n_);
  return SimplexPoint(std::move(probs));
}

double ent(const SimplexPoint& m) {
  KahanSum s;
  for (double p : m.probs())
    if (p > 0.0) s.add(-p * std::log(p));
  return s.value();
}

namespace {

template <typename Int>
double log_multinomial_impl(std::span<const Int> counts) {
  std::int64_t n = 0;
  for (Int c : counts) {
    if (c < 0) throw std::invalid_argument("log_multinomial: negative count");
    n += c;
  }
  double r = std::lgamma(double(n) + 1.0);
  for (Int c : counts) r -= std::lgamma(double(c) + 1.0);
  return r;
}

}  // namespace

double log_multinomial(const Composition& c) {
  return log_multinomial_impl<std::int64_t>(c.counts());
}

double log_multinomial(std::span<const std::int64_t> counts) {
  return log_multinomial_impl(counts);
}

double log_multinomial(std::span<const std::int32_t> counts) {
  return log_multinomial_impl(counts);
}

ModelSpec curie_weiss(double beta, double h) {
  if (beta < 0.0) throw std::invalid_argument("curie_weiss: beta must be nonnegative");
  if (h < 0.0) throw std::invalid_argument("curie_weiss: h must be nonnegative");
  ModelSpec model;
  model.q = 2;
  model.label = "curie_weiss";
  model.params = {{"beta", beta}, {"h", h}};
  model.interaction.value = [beta, h](const SimplexPoint& m) {
    double mt = cw_magnetization(m[0]);
    return 0.5 * beta * mt * mt + h * mt;
  };
  model.interaction.grad_hat = [beta, h](const Eigen::VectorXd& mhat) {
    double mt = cw_magnetization(mhat[0]);
    Eigen::VectorXd g(1);
    g[0] = -2.0 * (beta * mt + h);
    return g;
  };
  model.interaction.hess_hat = [beta](const Eigen::VectorXd&) {
    Eigen::MatrixXd hess(1, 1);
    hess(0, 0) = 4.0 * beta;
    return hess;
  };
  return model;
}

ModelSpec potts(int q, double beta) {
  if (q < 2) throw std::invalid_argument("potts: q must be at least 2");
  if (beta < 0.0) throw std::invalid_argument("potts: beta must be nonnegative");
  ModelSpec model;
  model.q = q;
  model.label = "potts";
  model.params = {{"q", double(q)}, {"beta", beta}};
  model.interaction.value = [beta](const SimplexPoint& m) {
    double s = 0.0;
    for (double p : m.probs()) s += p * p;
    return 0.5 * beta * s;
  };
  model.interaction.grad_hat = [beta](const Eigen::VectorXd& mhat) {
    double mq = 1.0 - mhat.sum();
    return Eigen::VectorXd(beta * (mhat.array() - mq));
  };
  model.interaction.hess_hat = [beta, q](const Eigen::VectorXd&) {
    int d = q - 1;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Constant(d, d, beta);
    hess.diagonal().array() += beta;
    return hess;
  };
  return model;
}

ModelSpec builtin_model(const std::string& name, const std::map<std::string, double>& params) {
  auto get = [&params](const std::string& key, double fallback, bool required) {
    auto it = params.find(key);
    if (it == params.end()) {
      if (required) throw std::invalid_argument("builtin_model: missing parameter " + key);
      return fallback;
    }
    return it->second;
  };
  if (name == "curie_weiss") {
    return curie_weiss(get("beta", 0.0, true), get("h", 0.0, false));
  }
  if (name == "potts") {
    double qreal = get("q", 0.0, true);
    int q = static_cast<int>(qreal);
    if (double(q) != qreal) throw std::invalid_argument("builtin_model: potts q must be integral");
    return potts(q, get("beta", 0.0, true));
  }
  throw std::invalid_argument("builtin_model: unknown model \"" + name + "\"");
}

}  // namespace gibbslab
