#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "dcps/denoiser.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

// Mixture of unit-covariance Gaussians. Log-weights are normalized at
// construction; immutable afterwards, so instances can be shared read-only
// across concurrent chains.
class IsotropicGm {
 public:
  IsotropicGm(Eigen::MatrixXd means, Eigen::VectorXd log_weights);

  int components() const { return static_cast<int>(means_.rows()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Eigen::MatrixXd& means() const { return means_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }

  double log_pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;
  // Gradient of log_pdf.
  Eigen::VectorXd score(const Eigen::VectorXd& x) const;
  // Posterior component probabilities at x, computed in log space.
  Eigen::VectorXd responsibilities(const Eigen::VectorXd& x) const;

  // Marginal of the forward process at step k: means scaled by sqrt(ab_k),
  // covariance still the identity.
  IsotropicGm noised(const NoiseSchedule& sched, int k) const;

 private:
  Eigen::MatrixXd means_;
  Eigen::VectorXd log_weights_;
  Eigen::VectorXd weights_;
};

// Mixture with one shared full covariance; the closed-form posterior of an
// IsotropicGm prior under a linear-Gaussian observation lives here.
class FullCovGm {
 public:
  FullCovGm(Eigen::MatrixXd means, Eigen::VectorXd log_weights,
            Eigen::MatrixXd covariance);

  int components() const { return static_cast<int>(means_.rows()); }
  int dim() const { return static_cast<int>(means_.cols()); }
  const Eigen::MatrixXd& means() const { return means_; }
  const Eigen::VectorXd& log_weights() const { return log_weights_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  double log_pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;

  // Mixture moments.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd second_moment_covariance() const;

 private:
  Eigen::MatrixXd means_;
  Eigen::VectorXd log_weights_;
  Eigen::VectorXd weights_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;  // lower factor, computed once
  double log_det_ = 0.0;
};

struct MeasurementModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  double sigma_y = 0.0;

  MeasurementModel(Eigen::MatrixXd A_in, Eigen::VectorXd y_in, double sigma);

  int obs_dim() const { return static_cast<int>(A.rows()); }
  int dim() const { return static_cast<int>(A.cols()); }
};

// Conjugate posterior of the unit-covariance mixture prior given
// y = A x + sigma_y eps: shared covariance (I + A^T A / sigma_y^2)^{-1},
// shifted means, reweighted components.
FullCovGm exact_posterior(const IsotropicGm& prior, const MeasurementModel& mm);

// Exact posterior-mean denoiser of the mixture prior, together with its
// Jacobian-vector products (the Jacobian is symmetric, so vjp == jvp).
class GmDenoiser : public Denoiser {
 public:
  GmDenoiser(IsotropicGm gm, NoiseSchedule sched);

  int dim() const override { return gm_.dim(); }
  Eigen::VectorXd denoise(int k, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd denoise_vjp(int k, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v) const override;

  // Score of the noised marginal q_k evaluated directly from the mixture.
  Eigen::VectorXd marginal_score(int k, const Eigen::VectorXd& x) const;

  const IsotropicGm& mixture() const { return gm_; }
  const NoiseSchedule& schedule() const { return sched_; }

 private:
  IsotropicGm gm_;
  NoiseSchedule sched_;
};

}  // namespace dcps
