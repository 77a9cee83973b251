#include <doctest.h>

#include <cmath>

#include "dcps/ddm.hpp"
#include "dcps/eval.hpp"
#include "dcps/gaussian_mixture.hpp"
#include "oracles.hpp"

using namespace dcps;

namespace {

IsotropicGm unit_gaussian(int d) {
  return IsotropicGm(Eigen::MatrixXd::Zero(1, d), Eigen::VectorXd::Zero(1));
}

IsotropicGm small_mixture() {
  Eigen::MatrixXd means(3, 2);
  means << -6.0, 2.0, 0.0, -3.0, 5.0, 4.0;
  Eigen::VectorXd lw(3);
  lw << std::log(0.5), std::log(0.2), std::log(0.3);
  return IsotropicGm(means, lw);
}

// Denoiser returning x / sqrt(ab_k); its score estimate vanishes.
class RescaleDenoiser : public Denoiser {
 public:
  RescaleDenoiser(int d, NoiseSchedule s) : d_(d), s_(std::move(s)) {}
  int dim() const override { return d_; }
  Eigen::VectorXd denoise(int k, const Eigen::VectorXd& x) const override {
    return x / std::sqrt(s_.alpha_bar(k));
  }
  Eigen::VectorXd denoise_vjp(int k, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v) const override {
    (void)x;
    return v / std::sqrt(s_.alpha_bar(k));
  }

 private:
  int d_;
  NoiseSchedule s_;
};

}  // namespace

TEST_CASE("forward_sample at k = 0 returns the input") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  Rng rng(1);
  Eigen::VectorXd x0(3);
  x0 << 1.0, -2.0, 0.5;
  CHECK(forward_sample(s, 0, x0, rng) == x0);
  CHECK_THROWS_AS(forward_sample(s, 21, x0, rng), std::out_of_range);
}

TEST_CASE("forward_sample matches the marginal moments") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  const int k = 12, n = 100000;
  Eigen::VectorXd x0(2);
  x0 << 1.5, -0.5;
  Rng rng(7);
  Eigen::MatrixXd draws(n, 2);
  for (int i = 0; i < n; ++i) draws.row(i) = forward_sample(s, k, x0, rng);
  const double ab = s.alpha_bar(k);
  const Eigen::VectorXd mean = draws.colwise().mean();
  const double want_var = 1.0 - ab;
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(mean[c] - std::sqrt(ab) * x0[c]) <
          4.0 * std::sqrt(want_var / n));
    const double var =
        (draws.col(c).array() - mean[c]).square().sum() / (n - 1);
    CHECK(std::abs(var - want_var) < 4.0 * want_var * std::sqrt(2.0 / n));
  }
  const double cov = ((draws.col(0).array() - mean[0]) *
                      (draws.col(1).array() - mean[1]))
                         .sum() /
                     (n - 1);
  CHECK(std::abs(cov) < 4.0 * want_var / std::sqrt(n));
}

TEST_CASE("score for a standard Gaussian prior is -x") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  const GmDenoiser den(unit_gaussian(3), s);
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd x = rng.normal_vector(3) * 2.0;
    CHECK(oracles::max_rel_err(score_from_denoiser(s, den, 9, x), (-x).eval()) <
          1e-12);
  }
}

TEST_CASE("score matches finite differences of the noised mixture density") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(30, 0.02, 0.3);
  const IsotropicGm gm = small_mixture();
  const GmDenoiser den(gm, s);
  const int k = 17;
  const IsotropicGm noised = gm.noised(s, k);
  Rng rng(11);
  for (int t = 0; t < 4; ++t) {
    const Eigen::VectorXd x = rng.normal_vector(2) * 3.0;
    const Eigen::VectorXd got = score_from_denoiser(s, den, k, x);
    const Eigen::VectorXd want = oracles::fd_gradient(
        [&](const Eigen::VectorXd& z) { return noised.log_pdf(z); }, x, 1e-6);
    CHECK(oracles::max_rel_err(got, want) < 1e-5);
  }
  CHECK_THROWS_AS(score_from_denoiser(s, den, 0, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("rescaling denoiser gives zero score") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  const RescaleDenoiser den(2, s);
  Rng rng(5);
  const Eigen::VectorXd x = rng.normal_vector(2);
  CHECK(score_from_denoiser(s, den, 7, x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("terminal backward step is the denoised point, no randomness") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  const GmDenoiser den(small_mixture(), s);
  Rng rng_a(42), rng_b(43);
  Eigen::VectorXd x1(2);
  x1 << 0.3, -0.2;
  const Eigen::VectorXd a = backward_step(s, den, 0, x1, rng_a);
  const Eigen::VectorXd b = backward_step(s, den, 0, x1, rng_b);
  CHECK(a == b);
  CHECK(a == den.denoise(1, x1));
}

TEST_CASE("backward step variance matches the bridge variance") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(20, 0.05, 0.4);
  const GmDenoiser den(unit_gaussian(1), s);
  const int k = 9, n = 100000;
  Eigen::VectorXd x1(1);
  x1 << 0.8;
  Rng rng(17);
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = backward_step(s, den, k, x1, rng)[0];
  const auto mv = oracles::mean_var(draws);
  const double want =
      bridge_coefficients(s.alpha_bar(k), s.alpha_bar(k + 1)).var;
  CHECK(std::abs(mv.var - want) < 4.0 * want * std::sqrt(2.0 / n));
}

TEST_CASE("ancestral chain reproduces the noised marginal for a unit prior") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(60, 0.005, 0.25);
  const GmDenoiser den(unit_gaussian(2), s);
  // For the unit-covariance prior every marginal is standard normal; stop
  // the chain at an interior step and compare.
  const int stop = 20, n = 10000;
  Rng rng(23);
  Eigen::MatrixXd chain(n, 2), exact(n, 2);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = rng.normal_vector(2);
    for (int k = s.steps() - 1; k >= stop; --k)
      x = backward_step(s, den, k, x, rng);
    chain.row(i) = x;
    exact.row(i) = rng.normal_vector(2);
  }
  Rng slice_rng(5);
  CHECK(sliced_wasserstein(chain, exact, 500, slice_rng) < 0.05);
}

TEST_CASE("prior_sample is deterministic given the seed") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(40, 0.01, 0.3);
  const GmDenoiser den(small_mixture(), s);
  Rng a(7), b(7);
  CHECK(prior_sample(s, den, a) == prior_sample(s, den, b));
}

TEST_CASE("prior_sample reproduces a mixture prior in sliced distance") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(250, 0.002, 0.055);
  const IsotropicGm gm = small_mixture();
  const GmDenoiser den(gm, s);
  const int n = 2000;
  Rng rng(31);
  Eigen::MatrixXd chain(n, 2), exact(n, 2);
  for (int i = 0; i < n; ++i) chain.row(i) = prior_sample(s, den, rng);
  for (int i = 0; i < n; ++i) exact.row(i) = gm.sample(rng);
  Rng slice_rng(6);
  CHECK(sliced_wasserstein(chain, exact, 500, slice_rng) < 0.3);
}

TEST_CASE("prior_sample mean for a unit Gaussian prior") {
  const NoiseSchedule s = NoiseSchedule::linear_beta(60, 0.005, 0.25);
  const GmDenoiser den(unit_gaussian(2), s);
  const int n = 4000;
  Rng rng(13);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) acc += prior_sample(s, den, rng);
  acc /= n;
  CHECK(acc.cwiseAbs().maxCoeff() < 4.0 / std::sqrt(static_cast<double>(n)));
}
