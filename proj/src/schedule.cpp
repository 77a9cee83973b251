#include "dcps/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcps {

NoiseSchedule::NoiseSchedule(std::vector<double> alpha_bar)
    : alpha_bar_(std::move(alpha_bar)) {
  if (alpha_bar_.size() < 2)
    throw std::invalid_argument("schedule needs at least one step");
  n_ = static_cast<int>(alpha_bar_.size()) - 1;
  if (alpha_bar_[0] != 1.0)
    throw std::invalid_argument("alpha_bar[0] must be exactly 1");
  for (int k = 0; k <= n_; ++k) {
    const double a = alpha_bar_[k];
    if (!(a > 0.0 && a <= 1.0))
      throw std::invalid_argument("alpha_bar must lie in (0, 1]");
    if (k > 0 && !(a < alpha_bar_[k - 1]))
      throw std::invalid_argument("alpha_bar must be strictly decreasing");
  }
  if (!(alpha_bar_[n_] < 1e-3))
    throw std::invalid_argument(
        "alpha_bar[n] must be < 1e-3 (terminal marginal ~ N(0, I)), got " +
        std::to_string(alpha_bar_[n_]));
}

NoiseSchedule NoiseSchedule::linear_beta(int n, double beta_min,
                                         double beta_max) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(beta_min > 0.0 && beta_max < 1.0 && beta_min <= beta_max))
    throw std::invalid_argument("need 0 < beta_min <= beta_max < 1");
  std::vector<double> ab(static_cast<std::size_t>(n) + 1);
  ab[0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double beta =
        n == 1 ? beta_min
               : beta_min + (beta_max - beta_min) * (i - 1) / (n - 1);
    ab[i] = ab[i - 1] * (1.0 - beta);
  }
  return NoiseSchedule(std::move(ab));
}

double NoiseSchedule::alpha_bar(int k) const {
  if (k < 0 || k > n_)
    throw std::out_of_range("schedule index " + std::to_string(k) +
                            " outside [0, " + std::to_string(n_) + "]");
  return alpha_bar_[k];
}

BlockSchedule BlockSchedule::uniform(int n, int num_blocks) {
  if (num_blocks < 1 || num_blocks > n)
    throw std::invalid_argument("need 1 <= L <= n");
  BlockSchedule bs;
  bs.boundaries.resize(static_cast<std::size_t>(num_blocks) + 1);
  for (int l = 0; l <= num_blocks; ++l)
    bs.boundaries[l] = static_cast<int>(
        std::lround(static_cast<double>(l) * n / num_blocks));
  bs.validate(n);
  return bs;
}

void BlockSchedule::validate(int n) const {
  if (boundaries.size() < 2)
    throw std::invalid_argument("block schedule needs at least one block");
  if (boundaries.front() != 0)
    throw std::invalid_argument("k_0 must be 0");
  if (boundaries.back() != n)
    throw std::invalid_argument("k_L must equal the step count");
  for (std::size_t i = 1; i < boundaries.size(); ++i)
    if (boundaries[i] <= boundaries[i - 1])
      throw std::invalid_argument("block boundaries must strictly increase");
}

BridgeCoeffs bridge_coefficients(double ab_j, double ab_k) {
  if (!(ab_k > 0.0 && ab_j >= ab_k && ab_j <= 1.0))
    throw std::invalid_argument("bridge needs 0 < ab_k <= ab_j <= 1");
  if (ab_j == ab_k) return {0.0, 1.0, 0.0};
  const double denom = 1.0 - ab_k;
  const double ratio = ab_k / ab_j;
  BridgeCoeffs c;
  c.x0_coef = std::sqrt(ab_j) * (1.0 - ratio) / denom;
  c.xk_coef = std::sqrt(ratio) * (1.0 - ab_j) / denom;
  c.var = (1.0 - ab_j) * (1.0 - ratio) / denom;
  return c;
}

std::pair<Eigen::VectorXd, double> bridge_params(const NoiseSchedule& sched,
                                                 int j, int k,
                                                 const Eigen::VectorXd& x0,
                                                 const Eigen::VectorXd& xk) {
  if (j < 0 || k > sched.steps() || j >= k)
    throw std::invalid_argument("bridge_params needs 0 <= j < k <= n");
  if (x0.size() != xk.size())
    throw std::invalid_argument("bridge endpoints must share dimension");
  const BridgeCoeffs c =
      bridge_coefficients(sched.alpha_bar(j), sched.alpha_bar(k));
  return {c.x0_coef * x0 + c.xk_coef * xk, c.var};
}

}  // namespace dcps
