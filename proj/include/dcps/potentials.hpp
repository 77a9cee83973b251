#pragma once

#include <Eigen/Core>

#include "dcps/denoiser.hpp"
#include "dcps/gaussian_mixture.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

// Annealed observation potential family. Every member is Gaussian in the
// forwarded signal: g_ab(x) = N(sqrt(ab) y; E x, diag(noise_variances(ab))),
// with ab the signal level of the block boundary. At ab = 1 this is the
// terminal likelihood g_0. Normalizing constants are always included so
// values are comparable across steps.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int obs_dim() const = 0;
  virtual int dim() const = 0;
  virtual const Eigen::MatrixXd& forward_matrix() const = 0;
  virtual Eigen::VectorXd pseudo_observation(double ab) const = 0;
  virtual Eigen::VectorXd noise_variances(double ab) const = 0;

  double log_g(double ab, const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_log_g(double ab, const Eigen::VectorXd& x) const;

  double log_g0(const Eigen::VectorXd& x) const { return log_g(1.0, x); }
  Eigen::VectorXd grad_log_g0(const Eigen::VectorXd& x) const {
    return grad_log_g(1.0, x);
  }
};

// g_0(x) = N(y; Ax, sigma_y^2 I); annealed with the pseudo observation
// sqrt(ab) y under the unchanged noise level.
class LinearGaussianPotential : public Potential {
 public:
  explicit LinearGaussianPotential(MeasurementModel mm);

  int obs_dim() const override { return mm_.obs_dim(); }
  int dim() const override { return mm_.dim(); }
  const Eigen::MatrixXd& forward_matrix() const override { return mm_.A; }
  Eigen::VectorXd pseudo_observation(double ab) const override;
  Eigen::VectorXd noise_variances(double ab) const override;

  const MeasurementModel& measurement() const { return mm_; }

 private:
  MeasurementModel mm_;
};

// Normal approximation of the Poisson likelihood,
// g_0(x) = prod_j N(y_j; rate (Ax)_j, y_j), annealed with pseudo
// observations sqrt(ab) y_j and variances sqrt(ab) y_j. Counts must be
// strictly positive since each y_j serves as a variance.
class PoissonPotential : public Potential {
 public:
  PoissonPotential(Eigen::MatrixXd A, Eigen::VectorXd y, double rate);

  int obs_dim() const override { return static_cast<int>(scaled_A_.rows()); }
  int dim() const override { return static_cast<int>(scaled_A_.cols()); }
  const Eigen::MatrixXd& forward_matrix() const override { return scaled_A_; }
  Eigen::VectorXd pseudo_observation(double ab) const override;
  Eigen::VectorXd noise_variances(double ab) const override;

  double rate() const { return rate_; }
  const Eigen::VectorXd& counts() const { return y_; }

 private:
  Eigen::MatrixXd scaled_A_;  // rate * A
  Eigen::VectorXd y_;
  double rate_;
};

// Marginalized block potential: the block-boundary potential g_{k_block}
// integrated over the bridge from step m down to k_block around the
// denoised endpoint. Available in closed form because the family is
// Gaussian. Requires k_block < m <= n; the boundary itself (m == k_block)
// is the plain potential and is rejected here.
double log_hat_g(const Potential& pot, const NoiseSchedule& sched, int k_block,
                 int m, const Eigen::VectorXd& x, const Denoiser& den);

// Gradient through both the explicit x dependence and the denoiser.
Eigen::VectorXd grad_log_hat_g(const Potential& pot, const NoiseSchedule& sched,
                               int k_block, int m, const Eigen::VectorXd& x,
                               const Denoiser& den);

// Single-sample surrogate: the potential evaluated at one draw of the
// bridge instead of the marginalized Gaussian. Biased low on average
// (Jensen) but free of the obs_dim x obs_dim solve.
double log_hat_g_sampled(const Potential& pot, const NoiseSchedule& sched,
                         int k_block, int m, const Eigen::VectorXd& x,
                         const Denoiser& den, const Eigen::VectorXd& z_prime);

Eigen::VectorXd grad_log_hat_g_sampled(const Potential& pot,
                                       const NoiseSchedule& sched, int k_block,
                                       int m, const Eigen::VectorXd& x,
                                       const Denoiser& den,
                                       const Eigen::VectorXd& z_prime);

// Value and gradient in one denoiser pass; the hot path of the variational
// objective.
struct PotentialEval {
  double value;
  Eigen::VectorXd grad;
};

PotentialEval log_hat_g_sampled_value_grad(const Potential& pot,
                                           const NoiseSchedule& sched,
                                           int k_block, int m,
                                           const Eigen::VectorXd& x,
                                           const Denoiser& den,
                                           const Eigen::VectorXd& z_prime);

}  // namespace dcps
