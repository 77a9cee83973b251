// Independent test oracles: quadrature, finite differences and simple
// statistics. These deliberately avoid the library's own computation paths.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace oracles {

// Central finite-difference gradient.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h = 1e-5);

// v^T Jacobian of a vector map by central differences.
Eigen::VectorXd fd_vjp(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h = 1e-5);

// Trapezoid integration of f over [lo, hi] with n+1 equally spaced points.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 int n);

double rel_err(double got, double want);
double max_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want);

struct MeanVar {
  double mean;
  double var;  // n-1 denominator
};
MeanVar mean_var(const std::vector<double>& v);

// Chi-squared upper quantile at the 1% level for df degrees of freedom
// (Wilson-Hilferty approximation; adequate for test thresholds).
double chi2_quantile_99(int df);

}  // namespace oracles
