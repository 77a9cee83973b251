#pragma once

#include <vector>

#include <Eigen/Core>

#include "dcps/gaussian_mixture.hpp"
#include "dcps/rng.hpp"
#include "dcps/schedule.hpp"

namespace dcps {

// Finite draws of one run plus the count of non-finite draws that were set
// aside. A run with any failed draw is reported through the NaN rule rather
// than entering distances with partial data.
struct SampleSet {
  Eigen::MatrixXd samples;
  int failed_count = 0;

  static SampleSet collect(const std::vector<Eigen::VectorXd>& draws);
  bool failed() const { return failed_count > 0; }
};

// Average over random unit directions of the exact 1-D Wasserstein distance
// between the projected empirical distributions (sorted coupling). order
// selects the per-slice distance: 2 (root mean squared gap, default) or 1
// (mean absolute gap). Requires equal sample counts.
double sliced_wasserstein(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          int n_slices, Rng& rng, int order = 2);

// Exact 1-D order-2 Wasserstein between equal-size empirical samples.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

// Closed-form W2 between Gaussians (Bures metric on covariances).
double w2_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2);

// Empirical check of the bridge-smoothing contraction in d = 1: lhs is the
// W2 gap between the bridged point-mass approximation and the bridged exact
// conditional at step l given x_k; rhs is the contraction factor times the
// W2 gap at step 0. Shared noise couples the two sides, so at l = 0 they
// coincide exactly.
struct PropA1Result {
  double lhs = 0.0;
  double rhs = 0.0;
  double factor = 0.0;
};

PropA1Result prop_a1_check(const IsotropicGm& gm, const NoiseSchedule& sched,
                           int l, int k, double x_k, int n_samples, Rng& rng);

struct RunValue {
  double value = 0.0;
  bool failed = false;
};

struct ReplicateSummary {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 1.96 * sd / sqrt(n), sd with n-1 denominator
  int n_failed = 0;
  int n_runs = 0;
};

// Failed runs contribute the value 7 (the scale a stable run reaches when
// it misses the posterior entirely). Requires at least two runs.
ReplicateSummary summarize(const std::vector<RunValue>& runs);

constexpr double kFailedRunValue = 7.0;

}  // namespace dcps
