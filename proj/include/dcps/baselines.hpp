#pragma once

#include <Eigen/Core>

#include "dcps/denoiser.hpp"
#include "dcps/gaussian_mixture.hpp"
#include "dcps/potentials.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

struct DpsConfig {
  // Adaptive rule zeta_m = step_scale / ||y - E xhat||, floored to avoid
  // blow-up when the residual vanishes; fixed_zeta applies when adaptive is
  // off.
  bool adaptive = true;
  double step_scale = 0.1;
  double fixed_zeta = 1.0;
  double residual_floor = 1e-8;

  void validate() const;
};

struct PigdmConfig {};

// Guided ancestral chain with post-step nudges along the residual gradient
// through the denoiser. A non-finite state at any step marks the sample as
// failed: the returned vector is all-NaN.
Eigen::VectorXd dps_sample(const DpsConfig& cfg, const NoiseSchedule& sched,
                           const Denoiser& den, const Potential& pot, Rng& rng);

// Guided chain with the Gaussian posterior approximation of the denoiser
// output; linear-Gaussian observations only. Failed runs return all-NaN.
Eigen::VectorXd pigdm_sample(const PigdmConfig& cfg, const NoiseSchedule& sched,
                             const Denoiser& den, const Potential& pot,
                             Rng& rng);

// Exact posterior draw for the benchmark reference.
Eigen::VectorXd oracle_sample(const FullCovGm& posterior, Rng& rng);

}  // namespace dcps
