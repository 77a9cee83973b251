#include <doctest.h>

#include <cmath>

#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"
#include "oracles.hpp"

using namespace dcps;

TEST_CASE("linear beta schedule satisfies the invariants") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(1000, 1e-4, 2e-2);
  CHECK(s.steps() == 1000);
  CHECK(s.alpha_bar(0) == 1.0);
  CHECK(s.alpha_bar(1000) < 1e-3);
  for (int k = 1; k <= 1000; ++k)
    CHECK(s.alpha_bar(k) < s.alpha_bar(k - 1));
}

TEST_CASE("schedule construction rejects bad sequences") {
  CHECK_THROWS_AS(NoiseSchedule({1.0, 0.5, 0.5, 1e-4}),
                  std::invalid_argument);  // not strictly decreasing
  CHECK_THROWS_AS(NoiseSchedule({0.99, 0.5, 1e-4}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule({1.0, 0.5, 0.1}),
                  std::invalid_argument);  // terminal level too high
  CHECK_THROWS_AS(NoiseSchedule({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSchedule({1.0, -0.1, 1e-4}), std::invalid_argument);
}

TEST_CASE("schedule index bounds") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(10, 0.05, 0.6);
  CHECK_THROWS_AS(s.alpha_bar(-1), std::out_of_range);
  CHECK_THROWS_AS(s.alpha_bar(11), std::out_of_range);
}

TEST_CASE("block schedule placement and validation") {
  const BlockSchedule b = BlockSchedule::uniform(1000, 3);
  CHECK(b.boundaries == std::vector<int>{0, 333, 667, 1000});
  CHECK(b.blocks() == 3);
  BlockSchedule bad;
  bad.boundaries = {0, 400, 400, 1000};
  CHECK_THROWS_AS(bad.validate(1000), std::invalid_argument);
  bad.boundaries = {1, 1000};
  CHECK_THROWS_AS(bad.validate(1000), std::invalid_argument);
  bad.boundaries = {0, 900};
  CHECK_THROWS_AS(bad.validate(1000), std::invalid_argument);
}

TEST_CASE("bridge edge cases") {
  // j = 0: the bridge collapses onto the clean endpoint.
  const BridgeCoeffs c0 = bridge_coefficients(1.0, 0.4);
  CHECK(c0.x0_coef == doctest::Approx(1.0));
  CHECK(c0.xk_coef == doctest::Approx(0.0));
  CHECK(c0.var == doctest::Approx(0.0));
  // Degenerate adjacent levels: the bridge is the noisy endpoint.
  const BridgeCoeffs cd = bridge_coefficients(0.4, 0.4);
  CHECK(cd.x0_coef == 0.0);
  CHECK(cd.xk_coef == 1.0);
  CHECK(cd.var == 0.0);
}

TEST_CASE("bridge values against grid Bayes integration") {
  // ab_j = 0.5, ab_k = 0.25, x0 = 1, xk = 2.
  const BridgeCoeffs c = bridge_coefficients(0.5, 0.25);
  const double mean = c.x0_coef * 1.0 + c.xk_coef * 2.0;
  CHECK(mean == doctest::Approx(1.41421).epsilon(1e-4));
  CHECK(c.var == doctest::Approx(0.33333).epsilon(1e-4));

  // Independent check: posterior of x_j under q_{j|0} * q_{k|j} on a grid.
  const double x0 = 1.0, xk = 2.0;
  const double sr = std::sqrt(0.25 / 0.5);
  const auto density = [&](double xj) {
    const double a = xj - std::sqrt(0.5) * x0;
    const double b = xk - sr * xj;
    return std::exp(-0.5 * a * a / 0.5 - 0.5 * b * b / (1.0 - 0.25 / 0.5));
  };
  const double z = oracles::integrate(density, -10, 10, 20000);
  const double m = oracles::integrate(
                       [&](double x) { return x * density(x); }, -10, 10,
                       20000) /
                   z;
  const double v = oracles::integrate(
                       [&](double x) { return (x - m) * (x - m) * density(x); },
                       -10, 10, 20000) /
                   z;
  CHECK(oracles::rel_err(mean, m) < 1e-8);
  CHECK(oracles::rel_err(c.var, v) < 1e-8);
}

TEST_CASE("bridge_params rejects bad indices and shapes") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(10, 0.05, 0.6);
  const Eigen::VectorXd a = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(bridge_params(s, 3, 3, a, a), std::invalid_argument);
  CHECK_THROWS_AS(bridge_params(s, 5, 3, a, a), std::invalid_argument);
  CHECK_THROWS_AS(bridge_params(s, -1, 3, a, a), std::invalid_argument);
  CHECK_THROWS_AS(bridge_params(s, 0, 11, a, a), std::invalid_argument);
  CHECK_THROWS_AS(bridge_params(s, 0, 3, a, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("bridge Bayes identity pointwise on a grid") {
  // q_{j|0}(xj|x0) q_{k|j}(xk|xj) == q_{j|0,k}(xj|x0,xk) q_{k|0}(xk|x0).
  const NoiseSchedule s = NoiseSchedule::linear_beta(40, 0.01, 0.35);
  const auto normal = [](double x, double mu, double var) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / var) /
           std::sqrt(2.0 * M_PI * var);
  };
  const int j = 11, k = 29;
  const double aj = s.alpha_bar(j), ak = s.alpha_bar(k);
  const BridgeCoeffs c = bridge_coefficients(aj, ak);
  const double x0 = 0.7, xk = -1.3;
  for (double xj = -4.0; xj <= 4.0; xj += 0.25) {
    const double lhs = normal(xj, std::sqrt(aj) * x0, 1 - aj) *
                       normal(xk, std::sqrt(ak / aj) * xj, 1 - ak / aj);
    const double rhs = normal(xj, c.x0_coef * x0 + c.xk_coef * xk, c.var) *
                       normal(xk, std::sqrt(ak) * x0, 1 - ak);
    CHECK(oracles::rel_err(lhs, rhs) < 1e-8);
  }
}

TEST_CASE("bridge variance bounds along the schedule") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(500, 1e-4, 3e-2);
  for (int k = 0; k < s.steps(); ++k) {
    const BridgeCoeffs c =
        bridge_coefficients(s.alpha_bar(k), s.alpha_bar(k + 1));
    CHECK(c.var >= 0.0);
    CHECK(c.var <= 1.0 - s.alpha_bar(k) + 1e-15);
  }
}

TEST_CASE("chained bridges preserve the conditional marginal") {
  // x_k ~ q_{k|0}, then x_m | (x0, x_k), then x_j | (x0, x_m) must leave
  // x_j ~ q_{j|0}.
  const NoiseSchedule s = NoiseSchedule::linear_beta(60, 0.01, 0.3);
  const int j = 14, m = 31, k = 52;
  const double x0 = 1.5;
  Rng rng(99);
  const int n = 200000;
  std::vector<double> xs(n);
  Eigen::VectorXd x0v(1), tmp(1);
  x0v[0] = x0;
  for (int i = 0; i < n; ++i) {
    const double ak = s.alpha_bar(k);
    double xk = std::sqrt(ak) * x0 + std::sqrt(1 - ak) * rng.normal();
    tmp[0] = xk;
    auto [mm, vm] = bridge_params(s, m, k, x0v, tmp);
    const double xm = mm[0] + std::sqrt(vm) * rng.normal();
    tmp[0] = xm;
    auto [mj, vj] = bridge_params(s, j, m, x0v, tmp);
    xs[i] = mj[0] + std::sqrt(vj) * rng.normal();
  }
  const auto mv = oracles::mean_var(xs);
  const double want_mean = std::sqrt(s.alpha_bar(j)) * x0;
  const double want_var = 1.0 - s.alpha_bar(j);
  CHECK(std::abs(mv.mean - want_mean) < 4.0 * std::sqrt(want_var / n));
  CHECK(std::abs(mv.var - want_var) <
        4.0 * want_var * std::sqrt(2.0 / n));
}
