#pragma once

#include <Eigen/Core>

#include "dcps/denoiser.hpp"
#include "dcps/potentials.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

enum class EstimatorMode { kExact, kBiased };

struct DcpsConfig {
  BlockSchedule blocks;
  int gradient_steps = 2;   // K, normalized SGD steps per transition
  int langevin_steps = 50;  // M, tamed Langevin steps per block
  double zeta = 1.0;
  double gamma = 1e-2;
  EstimatorMode drift_mode = EstimatorMode::kBiased;
  EstimatorMode objective_mode = EstimatorMode::kBiased;

  void validate(int n) const;
};

// Mean-field Gaussian transition parameters; v_hat holds per-coordinate
// log-variances so the variance stays positive under unconstrained updates.
struct VariationalState {
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd v_hat;
};

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd grad_mu;
  Eigen::VectorXd grad_v;
};

// Tamed score estimate of the block target at step k_hi: raw drift
// grad log g_hat + score, shrunk by 1/(1 + gamma ||raw||) so steps stay
// bounded by 1/gamma. Biased mode swaps in the single-draw potential
// gradient with a fresh perturbation per call.
Eigen::VectorXd tamed_drift(const NoiseSchedule& sched, const Denoiser& den,
                            const Potential& pot, int k_lo, int k_hi,
                            const Eigen::VectorXd& x, double gamma,
                            EstimatorMode mode, Rng& rng);

// n_steps unadjusted Langevin updates with the tamed drift; n_steps = 0
// returns x_init untouched.
Eigen::VectorXd langevin_refine(const NoiseSchedule& sched, const Denoiser& den,
                                const Potential& pot, int k_lo, int k_hi,
                                const Eigen::VectorXd& x_init, int n_steps,
                                double gamma, EstimatorMode mode, Rng& rng);

// Single-draw surrogate of the per-transition KL objective at step j inside
// block [k_lo, k_hi): reparameterized potential term plus the closed-form
// Gaussian KL to the backward transition. Gradients are exact for the
// realized (z, z_prime) pair.
ObjectiveEval biased_objective_and_grad(const VariationalState& state,
                                        const NoiseSchedule& sched,
                                        const Denoiser& den,
                                        const Potential& pot, int k_lo, int j,
                                        const Eigen::VectorXd& x_next,
                                        const Eigen::VectorXd& z,
                                        const Eigen::VectorXd& z_prime);

// Deterministic objective with the potential expectation in closed form.
// Linear-Gaussian potentials only; the denoiser Jacobian is frozen at
// mu_hat, which makes the expectation exact whenever the denoiser is affine.
ObjectiveEval exact_objective_and_grad(const VariationalState& state,
                                       const NoiseSchedule& sched,
                                       const Denoiser& den,
                                       const Potential& pot, int k_lo, int j,
                                       const Eigen::VectorXd& x_next);

// state - zeta * grad / ||grad|| with one norm over the concatenated
// gradient; a zero gradient leaves the state unchanged.
VariationalState normalized_sgd_step(const VariationalState& state,
                                     const Eigen::VectorXd& grad_mu,
                                     const Eigen::VectorXd& grad_v,
                                     double zeta);

// One posterior draw: blockwise Langevin refinement followed by optimized
// Gaussian transitions down to step 0. Deterministic given the rng seed.
Eigen::VectorXd dcps_sample(const DcpsConfig& cfg, const NoiseSchedule& sched,
                            const Denoiser& den, const Potential& pot,
                            Rng& rng);

}  // namespace dcps
