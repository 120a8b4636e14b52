#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace gibbslab {

/// Compensated (Kahan) accumulator. Summation order is fixed by the caller,
/// which keeps reductions reproducible across runs and thread counts.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// log(sum(exp(v))) over a span, -inf entries allowed. Two passes, index order.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;  // empty or all -inf
  KahanSum s;
  for (double x : v) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

/// Precomputed log-factorials: lf(n) = log(n!), valid for 0 <= n <= max_n.
class LogFactorials {
 public:
  explicit LogFactorials(std::int64_t max_n) : table_(max_n + 1, 0.0) {
    for (std::int64_t n = 1; n <= max_n; ++n) table_[n] = std::lgamma(double(n) + 1.0);
  }
  double operator()(std::int64_t n) const { return table_[n]; }
  double log_choose(std::int64_t n, std::int64_t k) const {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return table_[n] - table_[k] - table_[n - k];
  }

 private:
  std::vector<double> table_;
};

/// Regularized upper incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
/// Series for x < s + 1, Lentz continued fraction otherwise.
double regularized_gamma_q(double s, double x);

/// Chi-square upper tail probability with df degrees of freedom.
inline double chi_square_tail(double statistic, double df) {
  return regularized_gamma_q(0.5 * df, 0.5 * statistic);
}

/// Number of compositions of total into parts nonnegative integers,
/// C(total + parts - 1, parts - 1), exact in int64. Throws on overflow.
std::int64_t composition_count(std::int64_t total, int parts);

}  // namespace gibbslab
