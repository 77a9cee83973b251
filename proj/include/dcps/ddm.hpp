#pragma once

#include <Eigen/Core>

#include "dcps/denoiser.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

// Draw from the forward marginal q_{k|0}: sqrt(ab_k) x0 + sqrt(1-ab_k) eps.
Eigen::VectorXd forward_sample(const NoiseSchedule& sched, int k,
                               const Eigen::VectorXd& x0, Rng& rng);

// Score estimate s_k(x) = -(x - sqrt(ab_k) denoise(k, x)) / (1 - ab_k);
// exact when the denoiser is the exact conditional mean. Requires k >= 1.
Eigen::VectorXd score_from_denoiser(const NoiseSchedule& sched,
                                    const Denoiser& den, int k,
                                    const Eigen::VectorXd& x);

// One ancestral transition from step k+1 to step k. For k >= 1 this draws
// from the bridge around the denoised endpoint; the terminal step k = 0 is
// deterministic and consumes no randomness.
Eigen::VectorXd backward_step(const NoiseSchedule& sched, const Denoiser& den,
                              int k, const Eigen::VectorXd& x_next, Rng& rng);

// Full unconditional chain: X_n ~ N(0, I), then backward_step down to 0.
Eigen::VectorXd prior_sample(const NoiseSchedule& sched, const Denoiser& den,
                             Rng& rng);

}  // namespace dcps
