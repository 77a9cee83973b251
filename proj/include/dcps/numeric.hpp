#pragma once

#include <Eigen/Core>

namespace dcps {

double log_sum_exp(const Eigen::VectorXd& v);

// log N(r; 0, diag(var)) for elementwise variances var > 0.
double log_normal_diag(const Eigen::VectorXd& r, const Eigen::VectorXd& var);

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

}  // namespace dcps
