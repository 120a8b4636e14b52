#include "gibbslab/experiments.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gibbslab/mixture.hpp"
#include "gibbslab/sampling.hpp"

namespace gibbslab {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::analyze: return "analyze";
    case ExperimentKind::partition: return "partition";
    case ExperimentKind::kl_sweep: return "kl-sweep";
    case ExperimentKind::chaos: return "chaos";
    case ExperimentKind::critical: return "critical";
    case ExperimentKind::sample_check: return "sample-check";
  }
  throw std::logic_error("to_string: bad experiment kind");
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "analyze") return ExperimentKind::analyze;
  if (name == "partition") return ExperimentKind::partition;
  if (name == "kl-sweep") return ExperimentKind::kl_sweep;
  if (name == "chaos") return ExperimentKind::chaos;
  if (name == "critical") return ExperimentKind::critical;
  if (name == "sample-check") return ExperimentKind::sample_check;
  throw std::invalid_argument("unknown experiment kind \"" + name + "\"");
}

void ExperimentConfig::validate() const {
  if (model != "curie_weiss" && model != "potts")
    throw std::invalid_argument("config: unknown model \"" + model + "\"");
  if (n_list.empty()) throw std::invalid_argument("config: n_list must be nonempty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("config: n_list must be strictly increasing");
  for (std::int64_t n : n_list)
    if (n < 1) throw std::invalid_argument("config: n_list entries must be positive");
  double delta_cap = kind == ExperimentKind::critical ? 1.0 / 20.0 : 1.0 / 6.0;
  if (!(delta > 0.0) || !(delta < delta_cap))
    throw std::invalid_argument("config: delta outside the legal range for this kind");
  if (nodes_per_dim < 16) throw std::invalid_argument("config: nodes_per_dim must be >= 16");
  if (!(target_tol > 0.0)) throw std::invalid_argument("config: target_tol must be positive");
  if (k < 0) throw std::invalid_argument("config: k must be nonnegative");
  if (samples < 1) throw std::invalid_argument("config: samples must be positive");
  if (grid_n < 8) throw std::invalid_argument("config: grid_n must be at least 8");
  if (kind == ExperimentKind::critical &&
      (model != "curie_weiss" || beta != 1.0 || h != 0.0))
    throw std::invalid_argument("config: critical kind requires curie_weiss with beta=1, h=0");
}

namespace {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ModelSpec model_from_config(const ExperimentConfig& config) {
  if (config.model == "curie_weiss") return curie_weiss(config.beta, config.h);
  return potts(config.q, config.beta);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns_[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw std::logic_error("csv: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void footer(const std::string& key, const std::string& value) {
    out_ << "# " << key << "=" << value << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::vector<std::string> columns_;
  std::ostringstream out_;
};

std::string cell(double v) { return format_double(v); }
std::string cell(std::int64_t v) { return std::to_string(v); }

void attach_metadata(const ExperimentConfig& config, SweepTable& table) {
  table.metadata["model"] = config.model;
  table.metadata["beta"] = format_double(config.beta);
  table.metadata["h"] = format_double(config.h);
  table.metadata["q"] = std::to_string(config.q);
  table.metadata["delta"] = format_double(config.delta);
  table.metadata["nodes_per_dim"] = std::to_string(config.nodes_per_dim);
  table.metadata["seed"] = std::to_string(config.seed);
}

RunResult run_analyze(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  ModelAnalysis analysis = find_maximizers(model, config.grid_n, config.newton_tol);
  const int q = analysis.q();

  std::vector<std::string> columns = {"maximizer"};
  for (int k = 0; k < q; ++k) columns.push_back("m_" + std::to_string(k + 1));
  for (int k = 0; k < q - 1; ++k) columns.push_back("h_eig_" + std::to_string(k + 1));
  columns.push_back("w");
  for (int a = 0; a < q - 1; ++a)
    for (int b = 0; b < q - 1; ++b)
      columns.push_back("sigma_" + std::to_string(a + 1) + std::to_string(b + 1));
  CsvWriter csv(columns);

  RunResult result;
  attach_metadata(config, result.table);
  for (int j = 0; j < analysis.num_maximizers(); ++j) {
    const auto& p = analysis.maximizers[j];
    std::vector<std::string> cells = {std::to_string(j)};
    for (int k = 0; k < q; ++k) cells.push_back(cell(p.M[k]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.H);
    for (int k = 0; k < q - 1; ++k) cells.push_back(cell(es.eigenvalues()[k]));
    cells.push_back(cell(p.w));
    for (int a = 0; a < q - 1; ++a)
      for (int b = 0; b < q - 1; ++b) cells.push_back(cell(p.Sigma(a, b)));
    csv.row(cells);
    result.table.add(j + 1, p.M[0], "maximizer_mhat_1");
  }
  csv.footer("sup_g", format_double(analysis.sup_g));
  csv.footer("total_weight", format_double(analysis.total_weight));
  result.csv = csv.str();
  return result;
}

RunResult run_partition(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  ModelAnalysis analysis = find_maximizers(model, config.grid_n, config.newton_tol);

  CsvWriter csv({"n", "log_z_exact", "log_z_laplace", "gap"});
  RunResult result;
  attach_metadata(config, result.table);
  for (std::int64_t n : config.n_list) {
    double log_z = gibbs_pushforward(model, n).log_z;
    double asymptotic = laplace_log_z(analysis, n);
    double gap = log_z - asymptotic;
    csv.row({cell(n), cell(log_z), cell(asymptotic), cell(gap)});
    result.table.add(n, gap, "partition_gap");
  }
  result.csv = csv.str();
  return result;
}

RunResult run_kl_sweep(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  ModelAnalysis analysis = find_maximizers(model, config.grid_n, config.newton_tol);
  TruncationPolicy policy = TruncationPolicy::for_analysis(config.delta, analysis);
  QuadratureConfig quad{config.nodes_per_dim, config.target_tol};

  CsvWriter csv({"n", "kl_mu_nu", "kl_nu_mu"});
  RunResult result;
  attach_metadata(config, result.table);
  for (std::int64_t n : config.n_list) {
    LatticeDistribution mu = gibbs_pushforward(model, n).dist;
    LatticeDistribution nu = mixture_pushforward(analysis, n, policy, quad);
    double forward = kl(mu, nu);
    double backward = kl(nu, mu);
    csv.row({cell(n), cell(forward), cell(backward)});
    result.table.add(n, forward, "kl_mu_nu");
    result.table.add(n, backward, "kl_nu_mu");
  }
  if (config.n_list.size() >= 4) {
    FitResult fit = fit_rate(result.table.rows_with_label("kl_mu_nu"));
    csv.footer("fit_slope_kl_mu_nu", format_double(fit.slope));
    csv.footer("fit_intercept_kl_mu_nu", format_double(fit.intercept));
    csv.footer("fit_max_residual_kl_mu_nu", format_double(fit.max_residual));
  }
  result.csv = csv.str();
  return result;
}

RunResult run_chaos(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  ModelAnalysis analysis = find_maximizers(model, config.grid_n, config.newton_tol);
  TruncationPolicy policy = TruncationPolicy::for_analysis(config.delta, analysis);
  QuadratureConfig quad{config.nodes_per_dim, config.target_tol};

  CsvWriter csv({"n", "k", "kl_mu_rho", "tv_mu_rho", "tv_mu_nu"});
  RunResult result;
  attach_metadata(config, result.table);
  for (std::int64_t n : config.n_list) {
    std::int64_t k = config.k > 0 ? config.k : n / 2;
    if (k < 1 || k > n) throw std::invalid_argument("chaos: block size out of range");
    LatticeDistribution mu = gibbs_pushforward(model, n).dist;
    LatticeDistribution nu = mixture_pushforward(analysis, n, policy, quad);
    LatticeDistribution mu_k = marginal_counts(mu, k);
    LatticeDistribution nu_k = marginal_counts(nu, k);
    LatticeDistribution rho_k = product_baseline(analysis, k);
    double kl_mu_rho = kl(mu_k, rho_k);
    double tv_mu_rho = tv(mu_k, rho_k);
    double tv_mu_nu = tv(mu_k, nu_k);
    csv.row({cell(n), cell(k), cell(kl_mu_rho), cell(tv_mu_rho), cell(tv_mu_nu)});
    result.table.add(n, kl_mu_rho, "kl_mu_rho");
    result.table.add(n, tv_mu_rho, "tv_mu_rho");
    result.table.add(n, tv_mu_nu, "tv_mu_nu");
  }
  result.csv = csv.str();
  return result;
}

RunResult run_critical(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  TruncationPolicy policy(config.delta, 0.5);
  QuadratureConfig quad{config.nodes_per_dim, config.target_tol};

  CsvWriter csv({"n", "var_mtilde", "kl_mu_nu_crit"});
  RunResult result;
  attach_metadata(config, result.table);
  for (std::int64_t n : config.n_list) {
    LatticeDistribution mu = gibbs_pushforward(model, n).dist;
    LatticeDistribution nu = critical_cw_pushforward(n, policy, quad);
    auto [mean, variance] = magnetization_moments(mu);
    (void)mean;
    double divergence = kl(mu, nu);
    csv.row({cell(n), cell(variance), cell(divergence)});
    result.table.add(n, variance, "var_mtilde");
    result.table.add(n, divergence, "kl_mu_nu_crit");
  }
  if (config.n_list.size() >= 4) {
    FitResult fit = fit_rate(result.table.rows_with_label("var_mtilde"));
    csv.footer("fit_variance_exponent", format_double(fit.slope));
  }
  result.csv = csv.str();
  return result;
}

RunResult run_sample_check(const ExperimentConfig& config) {
  ModelSpec model = model_from_config(config);
  ModelAnalysis analysis = find_maximizers(model, config.grid_n, config.newton_tol);
  TruncationPolicy policy = TruncationPolicy::for_analysis(config.delta, analysis);
  QuadratureConfig quad{config.nodes_per_dim, config.target_tol};

  CsvWriter csv({"n", "sampler", "samples", "chi2", "df", "p_value"});
  RunResult result;
  attach_metadata(config, result.table);
  for (std::int64_t n : config.n_list) {
    LatticeDistribution mu = gibbs_pushforward(model, n).dist;
    auto gibbs_samples = sample_gibbs(mu, config.seed, config.samples);
    ChiSquareResult gof = chi_square_gof(gibbs_samples, mu);
    csv.row({cell(n), "gibbs", cell(config.samples), cell(gof.statistic), cell(gof.df),
             cell(gof.p_value)});
    result.table.add(n, gof.p_value, "p_value_gibbs");

    LatticeDistribution nu = mixture_pushforward(analysis, n, policy, quad);
    auto mixture_samples = sample_mixture(analysis, n, policy, config.seed + 1, config.samples);
    ChiSquareResult gof_nu = chi_square_gof(mixture_samples, nu);
    csv.row({cell(n), "mixture", cell(config.samples), cell(gof_nu.statistic), cell(gof_nu.df),
             cell(gof_nu.p_value)});
    result.table.add(n, gof_nu.p_value, "p_value_mixture");
  }
  result.csv = csv.str();
  return result;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j = json::parse(json_text);
  ExperimentConfig config;
  if (j.contains("model")) config.model = j["model"].get<std::string>();
  if (j.contains("q")) config.q = j["q"].get<int>();
  if (j.contains("beta")) config.beta = j["beta"].get<double>();
  if (j.contains("h")) config.h = j["h"].get<double>();
  if (j.contains("kind")) config.kind = experiment_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("n_list")) config.n_list = j["n_list"].get<std::vector<std::int64_t>>();
  if (j.contains("delta")) config.delta = j["delta"].get<double>();
  if (j.contains("nodes_per_dim")) config.nodes_per_dim = j["nodes_per_dim"].get<int>();
  if (j.contains("target_tol")) config.target_tol = j["target_tol"].get<double>();
  if (j.contains("k")) config.k = j["k"].get<std::int64_t>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("samples")) config.samples = j["samples"].get<std::int64_t>();
  if (j.contains("grid_n")) config.grid_n = j["grid_n"].get<int>();
  if (j.contains("newton_tol")) config.newton_tol = j["newton_tol"].get<double>();
  if (j.contains("out")) config.out = j["out"].get<std::string>();
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json j;
  j["model"] = config.model;
  j["q"] = config.q;
  j["beta"] = config.beta;
  j["h"] = config.h;
  j["kind"] = to_string(config.kind);
  j["n_list"] = config.n_list;
  j["delta"] = config.delta;
  j["nodes_per_dim"] = config.nodes_per_dim;
  j["target_tol"] = config.target_tol;
  j["k"] = config.k;
  j["seed"] = config.seed;
  j["samples"] = config.samples;
  j["grid_n"] = config.grid_n;
  j["newton_tol"] = config.newton_tol;
  j["out"] = config.out;
  return j.dump(2) + "\n";
}

RunResult run(const ExperimentConfig& config) {
  config.validate();
  RunResult result;
  switch (config.kind) {
    case ExperimentKind::analyze: result = run_analyze(config); break;
    case ExperimentKind::partition: result = run_partition(config); break;
    case ExperimentKind::kl_sweep: result = run_kl_sweep(config); break;
    case ExperimentKind::chaos: result = run_chaos(config); break;
    case ExperimentKind::critical: result = run_critical(config); break;
    case ExperimentKind::sample_check: result = run_sample_check(config); break;
  }
  if (!config.out.empty()) {
    std::ofstream out(config.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + config.out);
    out << result.csv;
  }
  return result;
}

}  // namespace gibbslab
