#include "dcps/numeric.hpp"

#include <cmath>
#include <limits>

namespace dcps {

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double log_normal_diag(const Eigen::VectorXd& r, const Eigen::VectorXd& var) {
  const double quad = (r.array().square() / var.array()).sum();
  const double logdet = var.array().log().sum();
  return -0.5 * (quad + logdet + r.size() * kLog2Pi);
}

}  // namespace dcps
