#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gibbslab/free_energy.hpp"
#include "gibbslab/lattice.hpp"
#include "gibbslab/numeric.hpp"
#include "gibbslab/rng.hpp"
#include "test_oracles.hpp"

using namespace gibbslab;

TEST_CASE("lattice enumeration") {
  LatticeIndexPtr tiny = enumerate_lattice(2, 2);
  REQUIRE(tiny->size() == 3);
  CHECK(tiny->counts(0)[0] == 0);
  CHECK(tiny->counts(0)[1] == 2);
  CHECK(tiny->counts(1)[0] == 1);
  CHECK(tiny->counts(1)[1] == 1);
  CHECK(tiny->counts(2)[0] == 2);
  CHECK(tiny->counts(2)[1] == 0);

  CHECK(enumerate_lattice(1, 3)->size() == 3);
  CHECK(enumerate_lattice(100, 3)->size() == 5151);

  CHECK_THROWS_AS(enumerate_lattice(1000, 4, 1000), std::runtime_error);
  CHECK_THROWS_AS(enumerate_lattice(0, 2), std::invalid_argument);
}

TEST_CASE("lattice rank is the enumeration inverse") {
  for (auto [n, q] : std::vector<std::pair<std::int64_t, int>>{{7, 2}, {9, 3}, {5, 4}}) {
    LatticeIndexPtr index = enumerate_lattice(n, q);
    for (std::int64_t i = 0; i < index->size(); ++i) {
      auto span = index->counts(i);
      std::vector<std::int64_t> counts(span.begin(), span.end());
      CHECK(index->rank(counts) == i);
    }
  }
}

TEST_CASE("independent spins pushforward") {
  GibbsResult result = gibbs_pushforward(curie_weiss(0.0, 0.0), 2);
  CHECK(result.dist.prob(0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(result.dist.prob(1) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(result.dist.prob(2) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(result.log_z == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("two spin partition function at unit coupling") {
  GibbsResult result = gibbs_pushforward(curie_weiss(1.0, 0.0), 2);
  double z = 2.0 * std::exp(1.0) + 2.0;
  CHECK(z == doctest::Approx(7.4365637).epsilon(1e-7));
  CHECK(result.log_z == doctest::Approx(std::log(z)).epsilon(1e-13));
  // Lattice terms e + 2 + e.
  CHECK(std::exp(result.log_z + result.dist.log_prob(0)) == doctest::Approx(std::exp(1.0)));
  CHECK(std::exp(result.log_z + result.dist.log_prob(1)) == doctest::Approx(2.0));
}

TEST_CASE("brute force oracle agreement") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    double beta = 3.0 * rng.uniform();
    double h = rng.uniform();
    for (std::int64_t n = 1; n <= 10; ++n) {
      ModelSpec model = curie_weiss(beta, h);
      GibbsResult fast = gibbs_pushforward(model, n);
      GibbsResult slow = brute_force_gibbs(model, n);
      CHECK(std::abs(fast.log_z - slow.log_z) <= 1e-12 * std::abs(slow.log_z));
      for (std::int64_t i = 0; i < fast.dist.size(); ++i)
        CHECK(std::abs(fast.dist.log_prob(i) - slow.dist.log_prob(i)) <=
              1e-12 * std::max(1.0, std::abs(slow.dist.log_prob(i))));
    }
  }
  // Three-state check.
  ModelSpec p3 = potts(3, 1.0);
  GibbsResult fast = gibbs_pushforward(p3, 8);
  GibbsResult slow = brute_force_gibbs(p3, 8);
  CHECK(std::abs(fast.log_z - slow.log_z) <= 1e-12 * std::abs(slow.log_z));
  for (std::int64_t i = 0; i < fast.dist.size(); ++i)
    CHECK(std::abs(fast.dist.log_prob(i) - slow.dist.log_prob(i)) <=
          1e-12 * std::max(1.0, std::abs(slow.dist.log_prob(i))));

  // Single spin: Z = sum_k exp(F(e_k)).
  GibbsResult single = brute_force_gibbs(curie_weiss(0.8, 0.0), 1);
  CHECK(single.log_z == doctest::Approx(std::log(2.0) + 0.4).epsilon(1e-12));
  CHECK_THROWS_AS(brute_force_gibbs(curie_weiss(1.0, 0.0), 40), std::invalid_argument);
}

TEST_CASE("partition asymptotic gap shrinks") {
  ModelSpec model = curie_weiss(0.5, 0.0);
  ModelAnalysis analysis = find_maximizers(model);
  double previous = 1e9;
  for (std::int64_t n : {500, 1000, 2000}) {
    double gap = std::abs(gibbs_pushforward(model, n).log_z - laplace_log_z(analysis, n));
    CHECK(gap < 0.02);
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("marginal of the full block is the identity") {
  GibbsResult result = gibbs_pushforward(curie_weiss(1.2, 0.1), 12);
  LatticeDistribution same = marginal_counts(result.dist, 12);
  for (std::int64_t i = 0; i < same.size(); ++i)
    CHECK(same.log_prob(i) == doctest::Approx(result.dist.log_prob(i)).epsilon(1e-12));
}

TEST_CASE("single draw marginal is the mean spin law") {
  GibbsResult result = gibbs_pushforward(curie_weiss(1.5, 0.2), 20);
  LatticeDistribution one = marginal_counts(result.dist, 1);
  Moments m = moments(result.dist);
  // P(state 1) = E[mhat].
  CHECK(one.prob(0) == doctest::Approx(1.0 - m.mean[0]).epsilon(1e-12));
  CHECK(one.prob(1) == doctest::Approx(m.mean[0]).epsilon(1e-12));
}

TEST_CASE("independent block marginal is binomial") {
  GibbsResult result = gibbs_pushforward(curie_weiss(0.0, 0.0), 10);
  LatticeDistribution block = marginal_counts(result.dist, 3);
  for (std::int64_t b = 0; b <= 3; ++b) {
    double binom = std::exp(log_multinomial(Composition({b, 3 - b})) - 3.0 * std::log(2.0));
    CHECK(block.prob(b) == doctest::Approx(binom).epsilon(1e-12));
  }
}

TEST_CASE("marginals satisfy the tower property") {
  GibbsResult result = gibbs_pushforward(curie_weiss(0.7, 0.0), 30);
  LatticeDistribution via_k = marginal_counts(marginal_counts(result.dist, 10), 4);
  LatticeDistribution direct = marginal_counts(result.dist, 4);
  for (std::int64_t i = 0; i < direct.size(); ++i)
    CHECK(via_k.prob(i) == doctest::Approx(direct.prob(i)).epsilon(1e-10));

  GibbsResult p3 = gibbs_pushforward(potts(3, 1.0), 15);
  LatticeDistribution via3 = marginal_counts(marginal_counts(p3.dist, 8), 3);
  LatticeDistribution direct3 = marginal_counts(p3.dist, 3);
  for (std::int64_t i = 0; i < direct3.size(); ++i)
    CHECK(via3.prob(i) == doctest::Approx(direct3.prob(i)).epsilon(1e-10));

  CHECK_THROWS_AS(marginal_counts(result.dist, 0), std::invalid_argument);
  CHECK_THROWS_AS(marginal_counts(result.dist, 31), std::invalid_argument);
}

TEST_CASE("moments of independent spins") {
  for (std::int64_t n : {10, 50}) {
    GibbsResult result = gibbs_pushforward(curie_weiss(0.0, 0.0), n);
    Moments m = moments(result.dist);
    CHECK(m.mean[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.covariance(0, 0) == doctest::Approx(1.0 / (4.0 * n)).epsilon(1e-10));
  }
}

TEST_CASE("point mass has zero covariance") {
  LatticeIndexPtr index = enumerate_lattice(6, 2);
  std::vector<double> lp(index->size(), -std::numeric_limits<double>::infinity());
  lp[3] = 0.0;
  LatticeDistribution point(index, lp, 0.0);
  Moments m = moments(point);
  CHECK(m.mean[0] == doctest::Approx(0.5));
  CHECK(std::abs(m.covariance(0, 0)) <= 1e-15);
}

TEST_CASE("scaled variance approaches the inverse curvature") {
  ModelSpec model = curie_weiss(0.5, 0.0);
  GibbsResult result = gibbs_pushforward(model, 4000);
  Moments m = moments(result.dist);
  CHECK(4000.0 * m.covariance(0, 0) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("empirical decay matches the rate function") {
  ModelSpec model = curie_weiss(0.5, 0.0);
  ModelAnalysis analysis = find_maximizers(model);
  const std::int64_t n = 10000;
  GibbsResult result = gibbs_pushforward(model, n);
  std::int64_t i = std::llround(0.3 * n);  // lattice point nearest mhat = 0.3
  Eigen::VectorXd point(1);
  point[0] = double(i) / n;
  double decay = -result.dist.log_prob(i) / double(n);
  CHECK(std::abs(decay - rate_function(analysis, point)) < 0.01);
}

TEST_CASE("magnetization moments") {
  GibbsResult result = gibbs_pushforward(curie_weiss(0.0, 0.0), 100);
  auto [mean, variance] = magnetization_moments(result.dist);
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(variance == doctest::Approx(4.0 * 0.25 / 100.0).epsilon(1e-9));
  GibbsResult p3 = gibbs_pushforward(potts(3, 0.5), 5);
  CHECK_THROWS_AS(magnetization_moments(p3.dist), std::invalid_argument);
}

TEST_CASE("distribution validation") {
  LatticeIndexPtr index = enumerate_lattice(3, 2);
  std::vector<double> bad(index->size(), -1.0);
  CHECK_THROWS_AS(LatticeDistribution(index, bad, 0.0), std::invalid_argument);
  std::vector<double> wrong_size(2, 0.0);
  CHECK_THROWS_AS(LatticeDistribution(index, wrong_size, 0.0), std::invalid_argument);
}

TEST_CASE("results do not depend on the worker thread count") {
  ModelSpec model = curie_weiss(0.7, 0.1);
  setenv("GIBBSLAB_THREADS", "1", 1);
  GibbsResult serial = gibbs_pushforward(model, 6000);
  setenv("GIBBSLAB_THREADS", "5", 1);
  GibbsResult threaded = gibbs_pushforward(model, 6000);
  unsetenv("GIBBSLAB_THREADS");
  CHECK(serial.log_z == threaded.log_z);
  for (std::int64_t i = 0; i < serial.dist.size(); ++i)
    CHECK(serial.dist.log_prob(i) == threaded.dist.log_prob(i));
}

TEST_CASE("three state partition asymptotic gap shrinks") {
  ModelSpec model = potts(3, 0.1);
  ModelAnalysis analysis = find_maximizers(model);
  REQUIRE(analysis.num_maximizers() == 1);
  double previous = 1e9;
  for (std::int64_t n : {12, 24, 48, 96}) {
    double gap = std::abs(gibbs_pushforward(model, n).log_z - laplace_log_z(analysis, n));
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 0.02);
}
