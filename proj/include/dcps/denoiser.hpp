#pragma once

#include <Eigen/Core>

namespace dcps {

// Posterior-mean denoiser of the diffusion prior: denoise(k, x) estimates
// E[X_0 | X_k = x] for 1 <= k <= n. denoise_vjp supplies v^T d(denoise)/dx,
// which gradient-based guidance needs to differentiate through the denoiser.
// Implementations must be safe for concurrent read-only use.
class Denoiser {
 public:
  virtual ~Denoiser() = default;

  virtual int dim() const = 0;
  virtual Eigen::VectorXd denoise(int k, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd denoise_vjp(int k, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& v) const = 0;
};

}  // namespace dcps
