#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dcps {

// Cumulative signal levels (alpha_bar_k) of the forward noising process.
// alpha_bar is strictly decreasing with alpha_bar[0] = 1 and
// alpha_bar[n] < 1e-3, so the terminal marginal is close to a standard
// Gaussian. Stored directly (not via betas) to keep bridge formulas exact.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::vector<double> alpha_bar);

  // Standard DDPM schedule: beta_i linear from beta_min to beta_max,
  // alpha_bar_k = prod_{i<=k} (1 - beta_i).
  static NoiseSchedule linear_beta(int n, double beta_min, double beta_max);

  int steps() const { return n_; }
  double alpha_bar(int k) const;
  const std::vector<double>& alpha_bar() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
  int n_ = 0;
};

// Block boundaries k_0 < k_1 < ... < k_L with k_0 = 0 and k_L = n.
struct BlockSchedule {
  std::vector<int> boundaries;

  static BlockSchedule uniform(int n, int num_blocks);

  int blocks() const { return static_cast<int>(boundaries.size()) - 1; }
  void validate(int n) const;
};

// Gaussian bridge q_{j|0,k}: mean = x0_coef * x0 + xk_coef * xk, isotropic
// variance var. Defined for any pair of signal levels ab_j >= ab_k,
// including the degenerate limits ab_j = 1 (mean = x0, var = 0) and
// ab_j = ab_k (mean = xk, var = 0).
struct BridgeCoeffs {
  double x0_coef;
  double xk_coef;
  double var;
};

BridgeCoeffs bridge_coefficients(double ab_j, double ab_k);

// Schedule-indexed bridge with bounds checks; requires 0 <= j < k <= n.
std::pair<Eigen::VectorXd, double> bridge_params(const NoiseSchedule& sched,
                                                 int j, int k,
                                                 const Eigen::VectorXd& x0,
                                                 const Eigen::VectorXd& xk);

}  // namespace dcps
