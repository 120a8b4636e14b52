#include <cmath>
#include <stdexcept>

#include "gibbslab/mixture.hpp"
#include "gibbslab/numeric.hpp"

namespace gibbslab {

namespace {

// Node windows never extend past this many standard deviations; the clipped
// Gaussian tail (< 4e-33 of mass) joins the atom at zero.
constexpr double kSigmaWindow = 12.0;

constexpr double kPsdTol = 1e-10;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

struct Spectrum {
  Eigen::VectorXd eigenvalues;   // clamped at zero, ascending
  Eigen::MatrixXd eigenvectors;  // columns
  std::vector<int> active;       // indices of nonzero eigenvalues
};

Spectrum analyze_sigma(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw std::invalid_argument("truncated Gaussian: Sigma must be square");
  double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("truncated Gaussian: Sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sigma + sigma.transpose()));
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw std::invalid_argument("truncated Gaussian: Sigma is not positive semidefinite");
  Spectrum s;
  s.eigenvalues = es.eigenvalues().cwiseMax(0.0);
  s.eigenvectors = es.eigenvectors();
  double lmax = s.eigenvalues.maxCoeff();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues[i] > 1e-13 * lmax && s.eigenvalues[i] > 0.0)
      s.active.push_back(static_cast<int>(i));
  return s;
}

}  // namespace

namespace detail {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

MixingNodeSet build_mixing_nodes(const Eigen::MatrixXd& sigma, double radius,
                                 const QuadratureConfig& config) {
  if (config.nodes_per_dim < 16)
    throw std::invalid_argument("quadrature: nodes_per_dim must be at least 16");
  if (!(radius > 0.0)) throw std::invalid_argument("quadrature: radius must be positive");
  const int d = static_cast<int>(sigma.rows());
  Spectrum spectrum = analyze_sigma(sigma);
  const int da = static_cast<int>(spectrum.active.size());

  MixingNodeSet set;
  set.points.resize(d, 0);
  set.zero_mass = 1.0;
  if (da == 0) return set;  // degenerate point mass at zero

  std::vector<double> gl_nodes, gl_weights;
  gauss_legendre(config.nodes_per_dim, gl_nodes, gl_weights);

  KahanSum mass;
  if (da == 1) {
    double lambda = spectrum.eigenvalues[spectrum.active[0]];
    Eigen::VectorXd v = spectrum.eigenvectors.col(spectrum.active[0]);
    double s = std::sqrt(lambda);
    double a = std::min(radius, kSigmaWindow * s);
    set.points.resize(d, config.nodes_per_dim);
    for (int i = 0; i < config.nodes_per_dim; ++i) {
      double x = a * gl_nodes[i];
      double w = gl_weights[i] * a * std::exp(-0.5 * x * x / lambda) / std::sqrt(2.0 * M_PI * lambda);
      set.points.col(i) = v * x;
      set.weights.push_back(w);
      mass.add(w);
    }
  } else if (da == 2) {
    // Polar rule in whitened coordinates: the ball preimage is an ellipse,
    // the integrand against the isotropic Gaussian is smooth, so the
    // periodic angle rule and the radial Gauss-Legendre rule both converge
    // fast and the ball boundary introduces no staircase error.
    double l1 = spectrum.eigenvalues[spectrum.active[0]];
    double l2 = spectrum.eigenvalues[spectrum.active[1]];
    Eigen::VectorXd v1 = spectrum.eigenvectors.col(spectrum.active[0]);
    Eigen::VectorXd v2 = spectrum.eigenvectors.col(spectrum.active[1]);
    int n_theta = config.nodes_per_dim;
    int n_r = config.nodes_per_dim;
    set.points.resize(d, static_cast<Eigen::Index>(n_theta) * n_r);
    Eigen::Index col = 0;
    for (int m = 0; m < n_theta; ++m) {
      double theta = 2.0 * M_PI * (m + 0.5) / n_theta;
      double ct = std::cos(theta), st = std::sin(theta);
      double rho_max = std::min(radius / std::sqrt(l1 * ct * ct + l2 * st * st), kSigmaWindow);
      for (int i = 0; i < n_r; ++i) {
        double rho = 0.5 * rho_max * (gl_nodes[i] + 1.0);
        double w = gl_weights[i] * (0.5 * rho_max / n_theta) * rho * std::exp(-0.5 * rho * rho);
        set.points.col(col) = v1 * (std::sqrt(l1) * rho * ct) + v2 * (std::sqrt(l2) * rho * st);
        set.weights.push_back(w);
        mass.add(w);
        ++col;
      }
    }
  } else {
    // Tensor rule over the whitened box covering the ball, nodes outside the
    // ball rejected; their mass stays in the atom.
    std::vector<double> half(da);
    for (int i = 0; i < da; ++i)
      half[i] = std::min(radius / std::sqrt(spectrum.eigenvalues[spectrum.active[i]]), kSigmaWindow);
    std::vector<int> idx(da, 0);
    std::vector<Eigen::VectorXd> cols;
    const double norm_const = std::pow(2.0 * M_PI, -0.5 * da);
    while (true) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      double w = norm_const;
      double u2 = 0.0;
      for (int i = 0; i < da; ++i) {
        double u = half[i] * gl_nodes[idx[i]];
        u2 += u * u;
        w *= gl_weights[idx[i]] * half[i];
        x += spectrum.eigenvectors.col(spectrum.active[i]) * (std::sqrt(spectrum.eigenvalues[spectrum.active[i]]) * u);
      }
      if (x.norm() <= radius) {
        w *= std::exp(-0.5 * u2);
        cols.push_back(std::move(x));
        set.weights.push_back(w);
        mass.add(w);
      }
      int i = da - 1;
      while (i >= 0 && ++idx[i] == config.nodes_per_dim) idx[i--] = 0;
      if (i < 0) break;
    }
    set.points.resize(d, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index c = 0; c < set.points.cols(); ++c) set.points.col(c) = cols[c];
  }

  double total = mass.value();
  if (total > 1.0 + config.target_tol)
    throw std::runtime_error("quadrature: normalization defect above target_tol");
  set.zero_mass = std::max(0.0, 1.0 - total);
  return set;
}

}  // namespace detail

TruncationPolicy::TruncationPolicy(double delta_, double min_coordinate_)
    : delta(delta_), min_coordinate(min_coordinate_) {
  if (!(delta > 0.0) || !(delta < 1.0 / 6.0))
    throw std::invalid_argument("TruncationPolicy: delta must lie in (0, 1/6)");
  if (!(min_coordinate > 0.0) || !(min_coordinate <= 1.0))
    throw std::invalid_argument("TruncationPolicy: min_coordinate must lie in (0, 1]");
}

TruncationPolicy TruncationPolicy::for_analysis(double delta, const ModelAnalysis& analysis) {
  return TruncationPolicy(delta, analysis.min_coordinate());
}

double TruncationPolicy::radius(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("TruncationPolicy::radius: N must be positive");
  return std::min(std::pow(double(n), delta), 0.5 * std::sqrt(double(n)) * min_coordinate);
}

double TruncationPolicy::atom_mass(const Eigen::MatrixXd& sigma, std::int64_t n) const {
  const double r = radius(n);
  Spectrum spectrum = analyze_sigma(sigma);
  const int da = static_cast<int>(spectrum.active.size());
  if (da == 0) return 0.0;
  if (da == 1) {
    double s = std::sqrt(spectrum.eigenvalues[spectrum.active[0]]);
    return std::erfc(r / (s * std::sqrt(2.0)));
  }
  if (da == 2) {
    // P(l1 z1^2 + l2 z2^2 > r^2) for iid standard normal z.
    double l1 = spectrum.eigenvalues[spectrum.active[1]];  // larger
    double l2 = spectrum.eigenvalues[spectrum.active[0]];
    double r1 = r / std::sqrt(l1);
    auto f = [&](double z) {
      double rest = (r * r - l1 * z * z) / l2;
      double b = std::sqrt(std::max(0.0, rest));
      double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      return phi * (normal_cdf(b) - normal_cdf(-b));
    };
    double inside = integrate(f, -r1, r1, 1e-13);
    return std::clamp(1.0 - inside, 0.0, 1.0);
  }
  // Higher dimensions: complement of the quadrature ball mass.
  auto nodes = detail::build_mixing_nodes(sigma, r, QuadratureConfig{});
  return nodes.zero_mass;
}

double truncated_gaussian_expectation(const Eigen::MatrixXd& sigma, const TruncationPolicy& policy,
                                      std::int64_t n,
                                      const std::function<double(const Eigen::VectorXd&)>& f,
                                      const QuadratureConfig& config) {
  auto nodes = detail::build_mixing_nodes(sigma, policy.radius(n), config);
  KahanSum acc;
  for (Eigen::Index i = 0; i < nodes.points.cols(); ++i)
    acc.add(nodes.weights[i] * f(nodes.points.col(i)));
  if (nodes.zero_mass > 0.0)
    acc.add(nodes.zero_mass * f(Eigen::VectorXd::Zero(sigma.rows())));
  return acc.value();
}

double quartic_density_normalizer() {
  return std::pow(12.0, 0.25) * std::tgamma(0.25) / 2.0;
}

}  // namespace gibbslab
