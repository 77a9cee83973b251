#include "dcps/gaussian_mixture.hpp"

#include <cmath>
#include <stdexcept>

#include "dcps/numeric.hpp"

namespace dcps {
namespace {

// Unnormalized log posterior over components of a unit-covariance mixture
// with means scaled by `scale`.
Eigen::VectorXd scaled_logits(const Eigen::MatrixXd& means,
                              const Eigen::VectorXd& log_weights, double scale,
                              const Eigen::VectorXd& x) {
  Eigen::VectorXd logits = log_weights + scale * (means * x);
  logits.array() -=
      0.5 * (x.squaredNorm() +
             scale * scale * means.rowwise().squaredNorm().array());
  return logits;
}

Eigen::VectorXd softmax(Eigen::VectorXd logits) {
  logits.array() -= logits.maxCoeff();
  Eigen::VectorXd p = logits.array().exp();
  return p / p.sum();
}

}  // namespace

IsotropicGm::IsotropicGm(Eigen::MatrixXd means, Eigen::VectorXd log_weights)
    : means_(std::move(means)), log_weights_(std::move(log_weights)) {
  if (means_.rows() < 1) throw std::invalid_argument("mixture needs >= 1 component");
  if (log_weights_.size() != means_.rows())
    throw std::invalid_argument("one log-weight per component required");
  log_weights_.array() -= log_sum_exp(log_weights_);
  weights_ = log_weights_.array().exp();
}

double IsotropicGm::log_pdf(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  return log_sum_exp(scaled_logits(means_, log_weights_, 1.0, x)) -
         0.5 * dim() * kLog2Pi;
}

Eigen::VectorXd IsotropicGm::sample(Rng& rng) const {
  const int c = rng.categorical(weights_);
  return means_.row(c).transpose() + rng.normal_vector(dim());
}

Eigen::VectorXd IsotropicGm::responsibilities(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  return softmax(scaled_logits(means_, log_weights_, 1.0, x));
}

Eigen::VectorXd IsotropicGm::score(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd r = responsibilities(x);
  return means_.transpose() * r - x;
}

IsotropicGm IsotropicGm::noised(const NoiseSchedule& sched, int k) const {
  const double ab = sched.alpha_bar(k);
  return IsotropicGm(std::sqrt(ab) * means_, log_weights_);
}

FullCovGm::FullCovGm(Eigen::MatrixXd means, Eigen::VectorXd log_weights,
                     Eigen::MatrixXd covariance)
    : means_(std::move(means)),
      log_weights_(std::move(log_weights)),
      cov_(std::move(covariance)) {
  if (log_weights_.size() != means_.rows())
    throw std::invalid_argument("one log-weight per component required");
  if (cov_.rows() != means_.cols() || cov_.cols() != means_.cols())
    throw std::invalid_argument("covariance shape mismatch");
  if (!cov_.isApprox(cov_.transpose(), 1e-10))
    throw std::invalid_argument("covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("covariance must be positive definite");
  chol_ = llt.matrixL();
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  log_weights_.array() -= log_sum_exp(log_weights_);
  weights_ = log_weights_.array().exp();
}

double FullCovGm::log_pdf(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  Eigen::VectorXd logits(components());
  for (int i = 0; i < components(); ++i) {
    const Eigen::VectorXd z = chol_.triangularView<Eigen::Lower>().solve(
        x - means_.row(i).transpose());
    logits[i] = log_weights_[i] - 0.5 * z.squaredNorm();
  }
  return log_sum_exp(logits) - 0.5 * (dim() * kLog2Pi + log_det_);
}

Eigen::VectorXd FullCovGm::sample(Rng& rng) const {
  const int c = rng.categorical(weights_);
  return means_.row(c).transpose() + chol_ * rng.normal_vector(dim());
}

Eigen::VectorXd FullCovGm::mean() const {
  return means_.transpose() * weights_;
}

Eigen::MatrixXd FullCovGm::second_moment_covariance() const {
  const Eigen::VectorXd mu = mean();
  Eigen::MatrixXd out = cov_;
  for (int i = 0; i < components(); ++i) {
    const Eigen::VectorXd d = means_.row(i).transpose() - mu;
    out += weights_[i] * d * d.transpose();
  }
  return out;
}

MeasurementModel::MeasurementModel(Eigen::MatrixXd A_in, Eigen::VectorXd y_in,
                                   double sigma)
    : A(std::move(A_in)), y(std::move(y_in)), sigma_y(sigma) {
  if (A.rows() != y.size())
    throw std::invalid_argument("A rows must match observation dimension");
  if (!(sigma_y > 0.0))
    throw std::invalid_argument("sigma_y must be strictly positive");
}

FullCovGm exact_posterior(const IsotropicGm& prior,
                          const MeasurementModel& mm) {
  if (mm.dim() != prior.dim())
    throw std::invalid_argument("measurement dimension mismatch");
  const int dx = prior.dim();
  const int dy = mm.obs_dim();
  const double s2 = mm.sigma_y * mm.sigma_y;

  Eigen::MatrixXd precision =
      Eigen::MatrixXd::Identity(dx, dx) + mm.A.transpose() * mm.A / s2;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("posterior precision solve failed");
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(dx, dx));

  const Eigen::VectorXd shift = mm.A.transpose() * mm.y / s2;
  Eigen::MatrixXd means(prior.components(), dx);
  for (int i = 0; i < prior.components(); ++i)
    means.row(i) =
        llt.solve(shift + prior.means().row(i).transpose()).transpose();

  // Component evidence N(y; A m_i, sigma_y^2 I_dy + A A^T).
  Eigen::MatrixXd evid_cov =
      s2 * Eigen::MatrixXd::Identity(dy, dy) + mm.A * mm.A.transpose();
  Eigen::LLT<Eigen::MatrixXd> evid_llt(evid_cov);
  if (evid_llt.info() != Eigen::Success)
    throw std::runtime_error("evidence covariance solve failed");
  const Eigen::MatrixXd Lev = evid_llt.matrixL();
  const double evid_logdet = 2.0 * Lev.diagonal().array().log().sum();
  Eigen::VectorXd logw(prior.components());
  for (int i = 0; i < prior.components(); ++i) {
    const Eigen::VectorXd r = mm.y - mm.A * prior.means().row(i).transpose();
    const Eigen::VectorXd z = Lev.triangularView<Eigen::Lower>().solve(r);
    logw[i] = prior.log_weights()[i] -
              0.5 * (z.squaredNorm() + evid_logdet + dy * kLog2Pi);
  }
  // FullCovGm normalizes the weights.
  return FullCovGm(std::move(means), std::move(logw), cov);
}

GmDenoiser::GmDenoiser(IsotropicGm gm, NoiseSchedule sched)
    : gm_(std::move(gm)), sched_(std::move(sched)) {}

Eigen::VectorXd GmDenoiser::denoise(int k, const Eigen::VectorXd& x) const {
  if (k < 1 || k > sched_.steps())
    throw std::invalid_argument("denoise requires 1 <= k <= n");
  const double ab = sched_.alpha_bar(k);
  const double sab = std::sqrt(ab);
  const Eigen::VectorXd r =
      softmax(scaled_logits(gm_.means(), gm_.log_weights(), sab, x));
  return sab * x + (1.0 - ab) * (gm_.means().transpose() * r);
}

Eigen::VectorXd GmDenoiser::marginal_score(int k,
                                           const Eigen::VectorXd& x) const {
  if (k < 0 || k > sched_.steps())
    throw std::invalid_argument("marginal_score index out of range");
  const double sab = std::sqrt(sched_.alpha_bar(k));
  const Eigen::VectorXd r =
      softmax(scaled_logits(gm_.means(), gm_.log_weights(), sab, x));
  return sab * (gm_.means().transpose() * r) - x;
}

Eigen::VectorXd GmDenoiser::denoise_vjp(int k, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& v) const {
  if (k < 1 || k > sched_.steps())
    throw std::invalid_argument("denoise_vjp requires 1 <= k <= n");
  const double ab = sched_.alpha_bar(k);
  const double sab = std::sqrt(ab);
  const Eigen::MatrixXd& M = gm_.means();
  const Eigen::VectorXd r =
      softmax(scaled_logits(M, gm_.log_weights(), sab, x));
  // Hessian of log q_k: sum_i r_i d_i d_i^T - s s^T - I with
  // d_i = sqrt(ab) m_i - x. All products folded into mat-vecs.
  const Eigen::VectorXd q = sab * (M * v).array() - x.dot(v);
  const Eigen::VectorXd s = sab * (M.transpose() * r) - x;
  const Eigen::VectorXd rd_q =
      sab * (M.transpose() * (r.array() * q.array()).matrix()) -
      x * r.dot(q);
  const Eigen::VectorXd hv = rd_q - s * s.dot(v) - v;
  // Tweedie: jacobian = (I + (1 - ab) H) / sqrt(ab); symmetric, so the
  // vector-Jacobian product equals the Jacobian-vector product.
  return (v + (1.0 - ab) * hv) / sab;
}

}  // namespace dcps
