#include "dcps/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace dcps {
namespace {

Eigen::VectorXd failed_sample(int d) {
  return Eigen::VectorXd::Constant(d,
                                   std::numeric_limits<double>::quiet_NaN());
}

// Ancestral DDPM transition from step k+1 to k given its denoised endpoint.
Eigen::VectorXd ancestral_step(const NoiseSchedule& sched, int k,
                               const Eigen::VectorXd& xhat,
                               const Eigen::VectorXd& x_next, Rng& rng) {
  if (k == 0) return xhat;
  const BridgeCoeffs c =
      bridge_coefficients(sched.alpha_bar(k), sched.alpha_bar(k + 1));
  return c.x0_coef * xhat + c.xk_coef * x_next +
         std::sqrt(c.var) * rng.normal_vector(static_cast<int>(x_next.size()));
}

}  // namespace

void DpsConfig::validate() const {
  if (!(step_scale > 0.0)) throw std::invalid_argument("step_scale must be > 0");
  if (!(residual_floor > 0.0))
    throw std::invalid_argument("residual_floor must be > 0");
}

Eigen::VectorXd dps_sample(const DpsConfig& cfg, const NoiseSchedule& sched,
                           const Denoiser& den, const Potential& pot,
                           Rng& rng) {
  cfg.validate();
  const int d = den.dim();
  const Eigen::MatrixXd& E = pot.forward_matrix();
  const Eigen::VectorXd y = pot.pseudo_observation(1.0);
  Eigen::VectorXd x = rng.normal_vector(d);
  for (int k = sched.steps() - 1; k >= 0; --k) {
    if (!x.allFinite()) return failed_sample(d);
    const Eigen::VectorXd xhat = den.denoise(k + 1, x);
    const Eigen::VectorXd r = y - E * xhat;
    // Residual gradient through the denoiser, in observation units (the
    // released reference implementation differentiates ||y - E xhat||, not
    // the noise-weighted likelihood).
    const Eigen::VectorXd g = den.denoise_vjp(k + 1, x, E.transpose() * r);
    const double zeta =
        cfg.adaptive
            ? cfg.step_scale / std::max(r.norm(), cfg.residual_floor)
            : cfg.fixed_zeta;
    x = ancestral_step(sched, k, xhat, x, rng) + zeta * g;
  }
  if (!x.allFinite()) return failed_sample(d);
  return x;
}

Eigen::VectorXd pigdm_sample(const PigdmConfig& cfg, const NoiseSchedule& sched,
                             const Denoiser& den, const Potential& pot,
                             Rng& rng) {
  (void)cfg;
  const auto* lin = dynamic_cast<const LinearGaussianPotential*>(&pot);
  if (lin == nullptr)
    throw std::invalid_argument("pigdm requires a linear-Gaussian potential");
  const MeasurementModel& mm = lin->measurement();
  const int d = den.dim();
  const int dy = mm.obs_dim();
  const Eigen::MatrixXd AAt = mm.A * mm.A.transpose();
  const double s2 = mm.sigma_y * mm.sigma_y;

  Eigen::VectorXd x = rng.normal_vector(d);
  for (int k = sched.steps() - 1; k >= 0; --k) {
    if (!x.allFinite()) return failed_sample(d);
    const Eigen::VectorXd xhat = den.denoise(k + 1, x);
    // Gaussian approximation of the clean state given x_{k+1} has variance
    // r2 = 1 - ab_{k+1}; the r2 prefactor keeps the guidance finite as
    // sigma_y -> 0, where it becomes the pseudo-inverse residual.
    const double r2 = 1.0 - sched.alpha_bar(k + 1);
    Eigen::MatrixXd sigma = r2 * AAt;
    sigma.diagonal().array() += s2;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("pigdm guidance covariance solve failed");
    const Eigen::VectorXd u = llt.solve(mm.y - mm.A * xhat);
    const Eigen::VectorXd w = r2 * (mm.A.transpose() * u);
    const Eigen::VectorXd g = den.denoise_vjp(k + 1, x, w);
    const double scale =
        std::sqrt(sched.alpha_bar(k) * sched.alpha_bar(k + 1));
    x = ancestral_step(sched, k, xhat, x, rng) + scale * g;
  }
  if (!x.allFinite()) return failed_sample(d);
  (void)dy;
  return x;
}

Eigen::VectorXd oracle_sample(const FullCovGm& posterior, Rng& rng) {
  return posterior.sample(rng);
}

}  // namespace dcps
