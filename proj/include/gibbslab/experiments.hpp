#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbslab/divergence.hpp"

namespace gibbslab {

enum class ExperimentKind { analyze, partition, kl_sweep, chaos, critical, sample_check };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// Declarative experiment description. Parsed from JSON, overridable from
/// command-line flags; serialize/parse round-trips exactly.
struct ExperimentConfig {
  std::string model = "curie_weiss";
  int q = 2;
  double beta = 0.5;
  double h = 0.0;
  ExperimentKind kind = ExperimentKind::analyze;
  std::vector<std::int64_t> n_list;
  double delta = 0.1;
  int nodes_per_dim = 64;
  double target_tol = 1e-9;
  std::int64_t k = 0;  // chaos block size; 0 means N/2
  std::uint64_t seed = 12345;
  std::int64_t samples = 100000;
  int grid_n = 64;
  double newton_tol = 1e-10;
  std::string out;

  /// Throws std::invalid_argument on any constraint violation.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

struct RunResult {
  SweepTable table;
  std::string csv;
};

/// Runs one experiment and renders its CSV (written to config.out when set).
/// Columns are fixed per kind and documented in the header row; floats are
/// emitted with 17 significant digits, so output is byte-stable for a given
/// config and seed.
RunResult run(const ExperimentConfig& config);

}  // namespace gibbslab
