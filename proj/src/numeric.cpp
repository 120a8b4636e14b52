#include "gibbslab/numeric.hpp"

#include <cmath>

namespace gibbslab {

namespace {

// Series representation of the regularized lower incomplete gamma P(s, x).
double gamma_p_series(double s, double x) {
  double ap = s;
  double sum = 1.0 / s;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Lentz continued fraction for the regularized upper incomplete gamma.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -double(i) * (double(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double regularized_gamma_q(double s, double x) {
  if (!(s > 0.0)) throw std::invalid_argument("regularized_gamma_q: s must be positive");
  if (x < 0.0) throw std::invalid_argument("regularized_gamma_q: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

std::int64_t composition_count(std::int64_t total, int parts) {
  if (total < 0 || parts < 1) throw std::invalid_argument("composition_count: bad arguments");
  // C(total + parts - 1, parts - 1), multiplicative form with overflow guard.
  std::int64_t r = parts - 1;
  std::int64_t n = total + parts - 1;
  if (r == 0) return 1;
  std::int64_t result = 1;
  for (std::int64_t i = 1; i <= r; ++i) {
    std::int64_t factor = n - r + i;
    if (result > (std::int64_t(4) << 60) / factor)
      throw std::overflow_error("composition_count: overflow");
    result = result * factor / i;  // exact: result * factor is divisible by i here
  }
  return result;
}

}  // namespace gibbslab
