#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gibbslab/core.hpp"
#include "gibbslab/lattice.hpp"
#include "gibbslab/numeric.hpp"
#include "gibbslab/rng.hpp"

using namespace gibbslab;

namespace {

SimplexPoint random_interior_point(Rng& rng, int q) {
  // Exponential spacings normalized: uniform-ish over the open simplex.
  std::vector<double> v(q);
  double sum = 0.0;
  for (int k = 0; k < q; ++k) {
    v[k] = -std::log(rng.uniform()) + 1e-9;
    sum += v[k];
  }
  KahanSum norm;
  for (int k = 0; k < q - 1; ++k) {
    v[k] /= sum;
    norm.add(v[k]);
  }
  v[q - 1] = 1.0 - norm.value();
  return SimplexPoint(v);
}

}  // namespace

TEST_CASE("simplex point validation") {
  CHECK_NOTHROW(SimplexPoint({0.25, 0.75}));
  CHECK_NOTHROW(SimplexPoint({1.0, 0.0}));
  CHECK_THROWS_AS(SimplexPoint({0.3, 0.8}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexPoint({-0.1, 1.1}), std::invalid_argument);
  CHECK_THROWS_AS(SimplexPoint({1.0}), std::invalid_argument);

  SimplexPoint m({0.2, 0.3, 0.5});
  CHECK(m.q() == 3);
  CHECK(m.hat().size() == 2);
  CHECK(m.hat()[0] == doctest::Approx(0.2));
  double hat_sum = m.hat()[0] + m.hat()[1];
  CHECK(hat_sum <= 1.0);
}

TEST_CASE("composition validation and conversion") {
  Composition c({2, 2});
  CHECK(c.n() == 4);
  SimplexPoint m = c.to_simplex();
  CHECK(m[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(Composition({-1, 5}), std::invalid_argument);
  CHECK_THROWS_AS(Composition({0, 0}), std::invalid_argument);
}

TEST_CASE("entropy values") {
  CHECK(ent(SimplexPoint({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(ent(SimplexPoint({1.0, 0.0, 0.0})) == doctest::Approx(0.0));
  // -0.25 log 0.25 - 0.75 log 0.75, evaluated in closed form.
  double expected = 0.25 * std::log(4.0) + 0.75 * std::log(4.0 / 3.0);
  CHECK(ent(SimplexPoint({0.25, 0.75})) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.5623351).epsilon(1e-6));
}

TEST_CASE("entropy range and concavity") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    int q = 2 + int(trial % 3);
    SimplexPoint a = random_interior_point(rng, q);
    SimplexPoint b = random_interior_point(rng, q);
    double ea = ent(a);
    CHECK(ea >= 0.0);
    CHECK(ea <= std::log(double(q)) + 1e-12);

    double t = rng.uniform();
    std::vector<double> mix(q);
    for (int k = 0; k < q; ++k) mix[k] = t * a[k] + (1.0 - t) * b[k];
    double lhs = ent(SimplexPoint(mix));
    double rhs = t * ea + (1.0 - t) * ent(b);
    CHECK(lhs >= rhs - 1e-12);
  }
}

TEST_CASE("log multinomial exact for small N") {
  CHECK(log_multinomial(Composition({2, 2})) == doctest::Approx(std::log(6.0)).epsilon(1e-13));
  CHECK(log_multinomial(Composition({4, 0})) == doctest::Approx(0.0));
  CHECK(log_multinomial(Composition({1, 2, 3})) == doctest::Approx(std::log(60.0)).epsilon(1e-13));

  // Exhaustive against integer factorials for N <= 20, q = 2 and q = 3.
  auto factorial = [](std::int64_t n) {
    std::int64_t f = 1;
    for (std::int64_t i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (std::int64_t n = 1; n <= 20; ++n) {
    for (std::int64_t a = 0; a <= n; ++a) {
      double exact = std::log(double(factorial(n)) / (double(factorial(a)) * factorial(n - a)));
      CHECK(log_multinomial(Composition({a, n - a})) == doctest::Approx(exact).epsilon(1e-12));
    }
  }
  for (std::int64_t n = 1; n <= 12; ++n)
    for (std::int64_t a = 0; a <= n; ++a)
      for (std::int64_t b = 0; a + b <= n; ++b) {
        double exact = std::log(double(factorial(n)) /
                                (double(factorial(a)) * factorial(b) * factorial(n - a - b)));
        CHECK(log_multinomial(Composition({a, b, n - a - b})) ==
              doctest::Approx(exact).epsilon(1e-12));
      }
}

TEST_CASE("multinomial growth is bounded by N times block entropy") {
  for (std::int64_t n : {1, 2, 5, 17, 60, 121, 200}) {
    for (std::int64_t a = 0; a <= n; ++a) {
      Composition c({a, n - a});
      CHECK(log_multinomial(c) <= double(n) * ent(c.to_simplex()) + 1e-9);
    }
  }
  for (std::int64_t n : {3, 20, 60})
    for (std::int64_t a = 0; a <= n; ++a)
      for (std::int64_t b = 0; a + b <= n; ++b) {
        Composition c({a, b, n - a - b});
        CHECK(log_multinomial(c) <= double(n) * ent(c.to_simplex()) + 1e-9);
      }
}

TEST_CASE("builtin curie_weiss") {
  ModelSpec model = curie_weiss(0.5, 0.0);
  CHECK(model.q == 2);
  // Zero magnetization: F vanishes.
  CHECK(model.interaction.value(SimplexPoint({0.5, 0.5})) == doctest::Approx(0.0));
  // Fully polarized: F = beta/2.
  CHECK(model.interaction.value(SimplexPoint({0.0, 1.0})) == doctest::Approx(0.25));

  ModelSpec with_field = curie_weiss(0.5, 0.2);
  CHECK(with_field.interaction.value(SimplexPoint({0.0, 1.0})) == doctest::Approx(0.45));

  CHECK_THROWS_AS(curie_weiss(-0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(curie_weiss(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("builtin potts") {
  ModelSpec model = potts(3, 1.0);
  CHECK(model.q == 3);
  CHECK(model.interaction.value(SimplexPoint({1.0 / 3, 1.0 / 3, 1.0 / 3})) ==
        doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK_THROWS_AS(potts(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(potts(3, -1.0), std::invalid_argument);
}

TEST_CASE("builtin_model by name") {
  ModelSpec cw = builtin_model("curie_weiss", {{"beta", 0.5}});
  CHECK(cw.params.at("h") == 0.0);
  ModelSpec p = builtin_model("potts", {{"q", 3.0}, {"beta", 1.0}});
  CHECK(p.q == 3);
  CHECK_THROWS_AS(builtin_model("ising_2d", {{"beta", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(builtin_model("potts", {{"q", 2.5}, {"beta", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(builtin_model("curie_weiss", {{"h", 0.1}}), std::invalid_argument);
}

TEST_CASE("interaction derivatives agree with finite differences") {
  Rng rng(7);
  const double step = 1e-5;
  for (ModelSpec model : {curie_weiss(0.7, 0.3), potts(3, 1.2)}) {
    int d = model.q - 1;
    for (int trial = 0; trial < 100; ++trial) {
      SimplexPoint m = random_interior_point(rng, model.q);
      // Keep a margin so the finite-difference stencils stay inside.
      bool interior = true;
      for (double p : m.probs()) interior = interior && p > 10 * step && p < 1.0 - 10 * step;
      if (!interior) continue;
      Eigen::VectorXd mhat = m.hat_vector();

      Eigen::VectorXd grad = model.interaction.grad_hat(mhat);
      Eigen::MatrixXd hess = model.interaction.hess_hat(mhat);
      auto f_at = [&](const Eigen::VectorXd& x) {
        return model.interaction.value(SimplexPoint::from_hat(x));
      };
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd up = mhat, dn = mhat;
        up[i] += step;
        dn[i] -= step;
        double fd = (f_at(up) - f_at(dn)) / (2.0 * step);
        CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
        for (int j = 0; j < d; ++j) {
          Eigen::VectorXd gup = model.interaction.grad_hat(up);
          Eigen::VectorXd gdn = model.interaction.grad_hat(dn);
          double fd2 = (gup[j] - gdn[j]) / (2.0 * step);
          CHECK(std::abs(fd2 - hess(i, j)) <= 1e-5 * std::max(1.0, std::abs(hess(i, j))));
        }
      }
    }
  }
}

TEST_CASE("regularized gamma Q") {
  // Exponential identity at two degrees of freedom.
  for (double x : {0.5, 1.0, 3.0, 10.0})
    CHECK(chi_square_tail(x, 2.0) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
  CHECK(regularized_gamma_q(0.5, 0.0) == doctest::Approx(1.0));
  // Monotone decreasing in x.
  CHECK(regularized_gamma_q(2.5, 1.0) > regularized_gamma_q(2.5, 2.0));
}

TEST_CASE("composition_count") {
  CHECK(composition_count(2, 2) == 3);
  CHECK(composition_count(100, 3) == 5151);
  CHECK(composition_count(0, 4) == 1);
}
