#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gibbslab/lattice.hpp"

namespace gibbslab {

/// Relative entropy sum p log(p/r) with 0 log(0/.) = 0. Returns +infinity
/// (a deliberate sentinel, branch on std::isinf) when p puts mass where r
/// has none. Both distributions must live on the same lattice.
double kl(const LatticeDistribution& p, const LatticeDistribution& r);

/// Total variation distance (1/2) sum |p - r|, in [0, 1].
double tv(const LatticeDistribution& p, const LatticeDistribution& r);

/// Rows of (N, value) pairs produced by experiments, grouped by label.
/// N must be strictly increasing within each label.
class SweepTable {
 public:
  struct Row {
    std::int64_t n;
    double value;
    std::string label;
  };

  void add(std::int64_t n, double value, const std::string& label);
  const std::vector<Row>& rows() const { return rows_; }
  std::vector<Row> rows_with_label(const std::string& label) const;

  std::map<std::string, std::string> metadata;

 private:
  std::vector<Row> rows_;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least-squares fit of log(value) against log(N) over the table rows
/// (single label expected). All values must be positive.
FitResult fit_rate(const SweepTable& table);
FitResult fit_rate(const std::vector<SweepTable::Row>& rows);

}  // namespace gibbslab
