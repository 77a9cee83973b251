#include "dcps/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "dcps/numeric.hpp"

namespace dcps {
namespace {

struct BlockMarginal {
  BridgeCoeffs bc;
  Eigen::VectorXd mu;        // bridge mean at k_block given x at step m
  Eigen::VectorXd residual;  // pseudo obs - E mu
};

BlockMarginal block_marginal(const Potential& pot, const NoiseSchedule& sched,
                             int k_block, int m, const Eigen::VectorXd& x,
                             const Denoiser& den) {
  if (k_block < 0 || m > sched.steps() || m <= k_block)
    throw std::invalid_argument(
        "marginalized potential requires k_block < m <= n");
  if (x.size() != pot.dim())
    throw std::invalid_argument("potential dimension mismatch");
  BlockMarginal out;
  out.bc = bridge_coefficients(sched.alpha_bar(k_block), sched.alpha_bar(m));
  out.mu = out.bc.x0_coef * den.denoise(m, x) + out.bc.xk_coef * x;
  out.residual = pot.pseudo_observation(sched.alpha_bar(k_block)) -
                 pot.forward_matrix() * out.mu;
  return out;
}

Eigen::LLT<Eigen::MatrixXd> marginal_cov_llt(const Potential& pot, double ab,
                                             double bridge_var) {
  const Eigen::MatrixXd& E = pot.forward_matrix();
  Eigen::MatrixXd sigma = bridge_var * (E * E.transpose());
  sigma.diagonal() += pot.noise_variances(ab);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("marginalized potential covariance not PD");
  return llt;
}

}  // namespace

double Potential::log_g(double ab, const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  const Eigen::VectorXd r = pseudo_observation(ab) - forward_matrix() * x;
  return log_normal_diag(r, noise_variances(ab));
}

Eigen::VectorXd Potential::grad_log_g(double ab,
                                      const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  const Eigen::VectorXd r = pseudo_observation(ab) - forward_matrix() * x;
  return forward_matrix().transpose() *
         (r.array() / noise_variances(ab).array()).matrix();
}

LinearGaussianPotential::LinearGaussianPotential(MeasurementModel mm)
    : mm_(std::move(mm)) {}

Eigen::VectorXd LinearGaussianPotential::pseudo_observation(double ab) const {
  return std::sqrt(ab) * mm_.y;
}

Eigen::VectorXd LinearGaussianPotential::noise_variances(double ab) const {
  (void)ab;
  return Eigen::VectorXd::Constant(mm_.obs_dim(), mm_.sigma_y * mm_.sigma_y);
}

PoissonPotential::PoissonPotential(Eigen::MatrixXd A, Eigen::VectorXd y,
                                   double rate)
    : y_(std::move(y)), rate_(rate) {
  if (A.rows() != y_.size())
    throw std::invalid_argument("A rows must match count dimension");
  if (!(rate_ > 0.0)) throw std::invalid_argument("rate must be positive");
  if ((A.array() < 0.0).any())
    throw std::invalid_argument("Poisson forward matrix must be nonnegative");
  if ((y_.array() <= 0.0).any())
    throw std::invalid_argument(
        "Poisson counts must be strictly positive (each is a variance)");
  scaled_A_ = rate_ * A;
}

Eigen::VectorXd PoissonPotential::pseudo_observation(double ab) const {
  return std::sqrt(ab) * y_;
}

Eigen::VectorXd PoissonPotential::noise_variances(double ab) const {
  return std::sqrt(ab) * y_;
}

double log_hat_g(const Potential& pot, const NoiseSchedule& sched, int k_block,
                 int m, const Eigen::VectorXd& x, const Denoiser& den) {
  const BlockMarginal bm = block_marginal(pot, sched, k_block, m, x, den);
  const auto llt =
      marginal_cov_llt(pot, sched.alpha_bar(k_block), bm.bc.var);
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::VectorXd z =
      L.triangularView<Eigen::Lower>().solve(bm.residual);
  const double logdet = 2.0 * L.diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + logdet + pot.obs_dim() * kLog2Pi);
}

Eigen::VectorXd grad_log_hat_g(const Potential& pot, const NoiseSchedule& sched,
                               int k_block, int m, const Eigen::VectorXd& x,
                               const Denoiser& den) {
  const BlockMarginal bm = block_marginal(pot, sched, k_block, m, x, den);
  const auto llt =
      marginal_cov_llt(pot, sched.alpha_bar(k_block), bm.bc.var);
  const Eigen::VectorXd u =
      pot.forward_matrix().transpose() * llt.solve(bm.residual);
  return bm.bc.x0_coef * den.denoise_vjp(m, x, u) + bm.bc.xk_coef * u;
}

double log_hat_g_sampled(const Potential& pot, const NoiseSchedule& sched,
                         int k_block, int m, const Eigen::VectorXd& x,
                         const Denoiser& den, const Eigen::VectorXd& z_prime) {
  const BlockMarginal bm = block_marginal(pot, sched, k_block, m, x, den);
  return pot.log_g(sched.alpha_bar(k_block),
                   bm.mu + std::sqrt(bm.bc.var) * z_prime);
}

Eigen::VectorXd grad_log_hat_g_sampled(const Potential& pot,
                                       const NoiseSchedule& sched, int k_block,
                                       int m, const Eigen::VectorXd& x,
                                       const Denoiser& den,
                                       const Eigen::VectorXd& z_prime) {
  const BlockMarginal bm = block_marginal(pot, sched, k_block, m, x, den);
  const Eigen::VectorXd w = pot.grad_log_g(
      sched.alpha_bar(k_block), bm.mu + std::sqrt(bm.bc.var) * z_prime);
  return bm.bc.x0_coef * den.denoise_vjp(m, x, w) + bm.bc.xk_coef * w;
}

PotentialEval log_hat_g_sampled_value_grad(const Potential& pot,
                                           const NoiseSchedule& sched,
                                           int k_block, int m,
                                           const Eigen::VectorXd& x,
                                           const Denoiser& den,
                                           const Eigen::VectorXd& z_prime) {
  const BlockMarginal bm = block_marginal(pot, sched, k_block, m, x, den);
  const double ab = sched.alpha_bar(k_block);
  const Eigen::VectorXd u = bm.mu + std::sqrt(bm.bc.var) * z_prime;
  PotentialEval out;
  out.value = pot.log_g(ab, u);
  const Eigen::VectorXd w = pot.grad_log_g(ab, u);
  out.grad = bm.bc.x0_coef * den.denoise_vjp(m, x, w) + bm.bc.xk_coef * w;
  return out;
}

}  // namespace dcps
