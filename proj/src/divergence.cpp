#include "gibbslab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gibbslab/numeric.hpp"

namespace gibbslab {

namespace {

void require_same_lattice(const LatticeDistribution& p, const LatticeDistribution& r) {
  if (!p.index().same_shape(r.index()))
    throw std::invalid_argument("divergence: distributions live on different lattices");
}

}  // namespace

double kl(const LatticeDistribution& p, const LatticeDistribution& r) {
  require_same_lattice(p, r);
  const double neg_inf = -std::numeric_limits<double>::infinity();
  KahanSum sum;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    double lp = p.log_prob(i);
    if (lp == neg_inf) continue;
    double lr = r.log_prob(i);
    if (lr == neg_inf) return std::numeric_limits<double>::infinity();
    sum.add(std::exp(lp) * (lp - lr));
  }
  return std::max(sum.value(), 0.0);
}

double tv(const LatticeDistribution& p, const LatticeDistribution& r) {
  require_same_lattice(p, r);
  KahanSum sum;
  for (std::int64_t i = 0; i < p.size(); ++i) sum.add(std::abs(p.prob(i) - r.prob(i)));
  return std::clamp(0.5 * sum.value(), 0.0, 1.0);
}

void SweepTable::add(std::int64_t n, double value, const std::string& label) {
  for (auto it = rows_.rbegin(); it != rows_.rend(); ++it) {
    if (it->label == label) {
      if (n <= it->n)
        throw std::invalid_argument("SweepTable: N must be strictly increasing per label");
      break;
    }
  }
  rows_.push_back({n, value, label});
}

std::vector<SweepTable::Row> SweepTable::rows_with_label(const std::string& label) const {
  std::vector<Row> out;
  for (const auto& row : rows_)
    if (row.label == label) out.push_back(row);
  return out;
}

FitResult fit_rate(const std::vector<SweepTable::Row>& rows) {
  if (rows.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 rows");
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    if (!(row.value > 0.0))
      throw std::invalid_argument("fit_rate: values must be positive to fit in log space");
    xs.push_back(std::log(double(row.n)));
    ys.push_back(std::log(row.value));
  }
  double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.max_residual = std::max(fit.max_residual,
                                std::abs(ys[i] - (fit.intercept + fit.slope * xs[i])));
  return fit;
}

FitResult fit_rate(const SweepTable& table) { return fit_rate(table.rows()); }

}  // namespace gibbslab
