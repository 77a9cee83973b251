#include "dcps/ddm.hpp"

#include <cmath>
#include <stdexcept>

namespace dcps {

Eigen::VectorXd forward_sample(const NoiseSchedule& sched, int k,
                               const Eigen::VectorXd& x0, Rng& rng) {
  const double ab = sched.alpha_bar(k);
  if (k == 0) return x0;
  return std::sqrt(ab) * x0 +
         std::sqrt(1.0 - ab) * rng.normal_vector(static_cast<int>(x0.size()));
}

Eigen::VectorXd score_from_denoiser(const NoiseSchedule& sched,
                                    const Denoiser& den, int k,
                                    const Eigen::VectorXd& x) {
  if (k < 1 || k > sched.steps())
    throw std::invalid_argument("score requires 1 <= k <= n");
  const double ab = sched.alpha_bar(k);
  return -(x - std::sqrt(ab) * den.denoise(k, x)) / (1.0 - ab);
}

Eigen::VectorXd backward_step(const NoiseSchedule& sched, const Denoiser& den,
                              int k, const Eigen::VectorXd& x_next, Rng& rng) {
  if (k < 0 || k + 1 > sched.steps())
    throw std::invalid_argument("backward_step requires 0 <= k <= n-1");
  const Eigen::VectorXd xhat = den.denoise(k + 1, x_next);
  if (k == 0) return xhat;
  const BridgeCoeffs c =
      bridge_coefficients(sched.alpha_bar(k), sched.alpha_bar(k + 1));
  return c.x0_coef * xhat + c.xk_coef * x_next +
         std::sqrt(c.var) * rng.normal_vector(static_cast<int>(x_next.size()));
}

Eigen::VectorXd prior_sample(const NoiseSchedule& sched, const Denoiser& den,
                             Rng& rng) {
  Eigen::VectorXd x = rng.normal_vector(den.dim());
  for (int k = sched.steps() - 1; k >= 0; --k)
    x = backward_step(sched, den, k, x, rng);
  return x;
}

}  // namespace dcps
