#include "dcps/sampler_dcps.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "dcps/ddm.hpp"
#include "dcps/numeric.hpp"

namespace dcps {
namespace {

// Single-draw potential term of the objective at x_j inside block
// [k_lo, k_hi). At the block boundary the bridge is degenerate and the
// plain block potential applies.
PotentialEval potential_term(const Potential& pot, const NoiseSchedule& sched,
                             int k_lo, int j, const Eigen::VectorXd& x_j,
                             const Denoiser& den,
                             const Eigen::VectorXd& z_prime) {
  if (j == k_lo) {
    const double ab = sched.alpha_bar(k_lo);
    return {pot.log_g(ab, x_j), pot.grad_log_g(ab, x_j)};
  }
  return log_hat_g_sampled_value_grad(pot, sched, k_lo, j, x_j, den, z_prime);
}

}  // namespace

void DcpsConfig::validate(int n) const {
  blocks.validate(n);
  if (gradient_steps < 0) throw std::invalid_argument("K must be >= 0");
  if (langevin_steps < 0) throw std::invalid_argument("M must be >= 0");
  if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
}

Eigen::VectorXd tamed_drift(const NoiseSchedule& sched, const Denoiser& den,
                            const Potential& pot, int k_lo, int k_hi,
                            const Eigen::VectorXd& x, double gamma,
                            EstimatorMode mode, Rng& rng) {
  Eigen::VectorXd pot_grad;
  if (mode == EstimatorMode::kBiased) {
    const Eigen::VectorXd z_prime =
        rng.normal_vector(static_cast<int>(x.size()));
    pot_grad = grad_log_hat_g_sampled(pot, sched, k_lo, k_hi, x, den, z_prime);
  } else {
    pot_grad = grad_log_hat_g(pot, sched, k_lo, k_hi, x, den);
  }
  const Eigen::VectorXd raw =
      pot_grad + score_from_denoiser(sched, den, k_hi, x);
  return raw / (1.0 + gamma * raw.norm());
}

Eigen::VectorXd langevin_refine(const NoiseSchedule& sched, const Denoiser& den,
                                const Potential& pot, int k_lo, int k_hi,
                                const Eigen::VectorXd& x_init, int n_steps,
                                double gamma, EstimatorMode mode, Rng& rng) {
  Eigen::VectorXd x = x_init;
  const double step_noise = std::sqrt(2.0 * gamma);
  for (int i = 0; i < n_steps; ++i) {
    const Eigen::VectorXd g =
        tamed_drift(sched, den, pot, k_lo, k_hi, x, gamma, mode, rng);
    x += gamma * g +
         step_noise * rng.normal_vector(static_cast<int>(x.size()));
  }
  return x;
}

ObjectiveEval biased_objective_and_grad(const VariationalState& state,
                                        const NoiseSchedule& sched,
                                        const Denoiser& den,
                                        const Potential& pot, int k_lo, int j,
                                        const Eigen::VectorXd& x_next,
                                        const Eigen::VectorXd& z,
                                        const Eigen::VectorXd& z_prime) {
  if (j < 1 || j < k_lo || j >= sched.steps())
    throw std::invalid_argument("objective requires max(1, k_lo) <= j < n");
  const BridgeCoeffs bcj =
      bridge_coefficients(sched.alpha_bar(j), sched.alpha_bar(j + 1));
  const Eigen::VectorXd mu0 =
      bcj.x0_coef * den.denoise(j + 1, x_next) + bcj.xk_coef * x_next;
  const double var_j = bcj.var;

  const Eigen::ArrayXd ev = state.v_hat.array().exp();
  const Eigen::ArrayXd sdev = (0.5 * state.v_hat.array()).exp();
  const Eigen::VectorXd x_j =
      state.mu_hat + (sdev * z.array()).matrix();

  const PotentialEval pe =
      potential_term(pot, sched, k_lo, j, x_j, den, z_prime);

  ObjectiveEval out;
  const Eigen::VectorXd dmu = state.mu_hat - mu0;
  out.value = -pe.value + 0.5 * dmu.squaredNorm() / var_j -
              0.5 * (state.v_hat.array() - ev / var_j).sum();
  out.grad_mu = -pe.grad + dmu / var_j;
  out.grad_v = (-0.5 * sdev * z.array() * pe.grad.array() -
                0.5 * (1.0 - ev / var_j))
                   .matrix();
  return out;
}

ObjectiveEval exact_objective_and_grad(const VariationalState& state,
                                       const NoiseSchedule& sched,
                                       const Denoiser& den,
                                       const Potential& pot, int k_lo, int j,
                                       const Eigen::VectorXd& x_next) {
  if (dynamic_cast<const LinearGaussianPotential*>(&pot) == nullptr)
    throw std::invalid_argument(
        "exact objective requires a linear-Gaussian potential");
  if (j < 1 || j < k_lo || j >= sched.steps())
    throw std::invalid_argument("objective requires max(1, k_lo) <= j < n");
  const int d = static_cast<int>(state.mu_hat.size());
  const BridgeCoeffs bcj =
      bridge_coefficients(sched.alpha_bar(j), sched.alpha_bar(j + 1));
  const Eigen::VectorXd mu0 =
      bcj.x0_coef * den.denoise(j + 1, x_next) + bcj.xk_coef * x_next;
  const double var_j = bcj.var;

  const double ab_l = sched.alpha_bar(k_lo);
  const Eigen::MatrixXd& E = pot.forward_matrix();
  const int dy = pot.obs_dim();

  // Bridge from j down to the block boundary, denoiser frozen at mu_hat:
  // the forwarded mean map x -> E mu_l(x) has constant Jacobian
  // M = c0 E J(mu_hat) + c1 E.
  BridgeCoeffs bcl{0.0, 1.0, 0.0};
  Eigen::VectorXd mu_l = state.mu_hat;
  Eigen::MatrixXd M = E;
  if (j > k_lo) {
    bcl = bridge_coefficients(ab_l, sched.alpha_bar(j));
    mu_l = bcl.x0_coef * den.denoise(j, state.mu_hat) +
           bcl.xk_coef * state.mu_hat;
    for (int a = 0; a < dy; ++a)
      M.row(a) = bcl.x0_coef *
                     den.denoise_vjp(j, state.mu_hat, E.row(a).transpose())
                         .transpose() +
                 bcl.xk_coef * E.row(a);
  }

  Eigen::MatrixXd sigma = bcl.var * (E * E.transpose());
  sigma.diagonal() += pot.noise_variances(ab_l);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("marginalized potential covariance not PD");
  const Eigen::MatrixXd L = llt.matrixL();
  const double logdet = 2.0 * L.diagonal().array().log().sum();

  const Eigen::VectorXd r = pot.pseudo_observation(ab_l) - E * mu_l;
  const Eigen::VectorXd sir = llt.solve(r);
  const Eigen::MatrixXd siM = llt.solve(M);
  const Eigen::VectorXd quad_diag =
      (M.array() * siM.array()).colwise().sum().transpose();

  const Eigen::ArrayXd ev = state.v_hat.array().exp();
  const Eigen::VectorXd dmu = state.mu_hat - mu0;

  ObjectiveEval out;
  out.value = 0.5 * (r.dot(sir) + (ev * quad_diag.array()).sum() + logdet +
                     dy * kLog2Pi) +
              0.5 * dmu.squaredNorm() / var_j -
              0.5 * (state.v_hat.array() - ev / var_j).sum();
  out.grad_mu = -M.transpose() * sir + dmu / var_j;
  out.grad_v =
      (0.5 * ev * quad_diag.array() - 0.5 * (1.0 - ev / var_j)).matrix();
  (void)d;
  return out;
}

VariationalState normalized_sgd_step(const VariationalState& state,
                                     const Eigen::VectorXd& grad_mu,
                                     const Eigen::VectorXd& grad_v,
                                     double zeta) {
  const double norm =
      std::sqrt(grad_mu.squaredNorm() + grad_v.squaredNorm());
  if (norm == 0.0) return state;
  const double scale = zeta / norm;
  return {state.mu_hat - scale * grad_mu, state.v_hat - scale * grad_v};
}

Eigen::VectorXd dcps_sample(const DcpsConfig& cfg, const NoiseSchedule& sched,
                            const Denoiser& den, const Potential& pot,
                            Rng& rng) {
  cfg.validate(sched.steps());
  if (pot.dim() != den.dim())
    throw std::invalid_argument("potential/denoiser dimension mismatch");
  const int d = den.dim();
  Eigen::VectorXd x = rng.normal_vector(d);

  const int num_blocks = cfg.blocks.blocks();
  for (int l = num_blocks - 1; l >= 0; --l) {
    const int k_lo = cfg.blocks.boundaries[l];
    const int k_hi = cfg.blocks.boundaries[l + 1];
    try {
      x = langevin_refine(sched, den, pot, k_lo, k_hi, x, cfg.langevin_steps,
                          cfg.gamma, cfg.drift_mode, rng);
      for (int j = k_hi - 1; j >= k_lo; --j) {
        if (j == 0) {
          // Terminal transition is the deterministic denoised point; its
          // variance is zero so there is nothing to optimize or sample.
          x = den.denoise(1, x);
          continue;
        }
        const BridgeCoeffs bcj =
            bridge_coefficients(sched.alpha_bar(j), sched.alpha_bar(j + 1));
        VariationalState st{
            bcj.x0_coef * den.denoise(j + 1, x) + bcj.xk_coef * x,
            Eigen::VectorXd::Constant(d, std::log(bcj.var))};
        for (int r = 0; r < cfg.gradient_steps; ++r) {
          ObjectiveEval ev;
          if (cfg.objective_mode == EstimatorMode::kBiased) {
            const Eigen::VectorXd z = rng.normal_vector(d);
            const Eigen::VectorXd z_prime = rng.normal_vector(d);
            ev = biased_objective_and_grad(st, sched, den, pot, k_lo, j, x, z,
                                           z_prime);
          } else {
            ev = exact_objective_and_grad(st, sched, den, pot, k_lo, j, x);
          }
          st = normalized_sgd_step(st, ev.grad_mu, ev.grad_v, cfg.zeta);
        }
        const Eigen::VectorXd eps = rng.normal_vector(d);
        x = st.mu_hat +
            ((0.5 * st.v_hat.array()).exp() * eps.array()).matrix();
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("dcps block " + std::to_string(l) + " [" +
                               std::to_string(k_lo) + "," +
                               std::to_string(k_hi) + "]: " + e.what());
    }
  }
  return x;
}

}  // namespace dcps
