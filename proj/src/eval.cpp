#include "dcps/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace dcps {

SampleSet SampleSet::collect(const std::vector<Eigen::VectorXd>& draws) {
  SampleSet out;
  if (draws.empty()) return out;
  const int d = static_cast<int>(draws.front().size());
  int good = 0;
  for (const auto& v : draws)
    if (v.allFinite()) ++good;
  out.samples.resize(good, d);
  int row = 0;
  for (const auto& v : draws) {
    if (v.allFinite())
      out.samples.row(row++) = v.transpose();
    else
      ++out.failed_count;
  }
  return out;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("need equal nonempty sample counts");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

double sliced_wasserstein(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          int n_slices, Rng& rng, int order) {
  if (x.cols() != y.cols())
    throw std::invalid_argument("sample dimensions differ");
  if (x.rows() != y.rows())
    throw std::invalid_argument("sample counts differ");
  if (x.rows() < 1) throw std::invalid_argument("empty sample sets");
  if (n_slices < 1) throw std::invalid_argument("need at least one slice");
  if (order != 1 && order != 2)
    throw std::invalid_argument("per-slice order must be 1 or 2");

  const int d = static_cast<int>(x.cols());
  const int n = static_cast<int>(x.rows());

  // Directions are consumed from the rng in slice order; projections are
  // evaluated in blocks so the dense products stay cache-sized.
  constexpr int kBlock = 128;
  Eigen::MatrixXd dirs(d, kBlock);
  Eigen::MatrixXd px(n, kBlock), py(n, kBlock);
  std::vector<double> bufx(n), bufy(n);

  double total = 0.0;
  int done = 0;
  while (done < n_slices) {
    const int b = std::min(kBlock, n_slices - done);
    for (int s = 0; s < b; ++s) {
      Eigen::VectorXd theta = rng.normal_vector(d);
      double norm = theta.norm();
      while (norm == 0.0) {
        theta = rng.normal_vector(d);
        norm = theta.norm();
      }
      dirs.col(s) = theta / norm;
    }
    px.leftCols(b).noalias() = x * dirs.leftCols(b);
    py.leftCols(b).noalias() = y * dirs.leftCols(b);
    for (int s = 0; s < b; ++s) {
      Eigen::VectorXd::Map(bufx.data(), n) = px.col(s);
      Eigen::VectorXd::Map(bufy.data(), n) = py.col(s);
      std::sort(bufx.begin(), bufx.end());
      std::sort(bufy.begin(), bufy.end());
      double acc = 0.0;
      if (order == 2) {
        for (int i = 0; i < n; ++i) {
          const double g = bufx[i] - bufy[i];
          acc += g * g;
        }
        total += std::sqrt(acc / n);
      } else {
        for (int i = 0; i < n; ++i) acc += std::abs(bufx[i] - bufy[i]);
        total += acc / n;
      }
    }
    done += b;
  }
  return total / n_slices;
}

namespace {

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  const double tol = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < -tol)
      throw std::invalid_argument(std::string(what) +
                                  " must be positive semidefinite");
    lam[i] = std::sqrt(std::max(lam[i], 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double w2_gaussian(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1,
                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& cov2) {
  if (mu1.size() != mu2.size() || cov1.rows() != mu1.size() ||
      cov2.rows() != mu2.size() || cov1.rows() != cov1.cols() ||
      cov2.rows() != cov2.cols())
    throw std::invalid_argument("gaussian moment shapes mismatch");
  // Strict PD per contract.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(cov1), es2(cov2);
  if (es1.eigenvalues().minCoeff() <= 0.0 ||
      es2.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("covariances must be positive definite");

  const Eigen::MatrixXd root2 = spd_sqrt(cov2, "cov2");
  const Eigen::MatrixXd cross = spd_sqrt(root2 * cov1 * root2, "cross term");
  const double tr = cov1.trace() + cov2.trace() - 2.0 * cross.trace();
  const double sq = (mu1 - mu2).squaredNorm() + std::max(tr, 0.0);
  return std::sqrt(sq);
}

PropA1Result prop_a1_check(const IsotropicGm& gm, const NoiseSchedule& sched,
                           int l, int k, double x_k, int n_samples, Rng& rng) {
  if (gm.dim() != 1)
    throw std::invalid_argument("prop_a1_check is defined for d_x = 1");
  if (l < 0 || k > sched.steps() || l >= k)
    throw std::invalid_argument("need 0 <= l < k <= n");
  if (n_samples < 1) throw std::invalid_argument("need samples");

  const double ab_k = sched.alpha_bar(k);
  const BridgeCoeffs bc = bridge_coefficients(sched.alpha_bar(l), ab_k);
  const double sig = std::sqrt(bc.var);

  // Exact conditional of the clean state given x_k: responsibilities of the
  // noised mixture, component means (1-ab) m_i + sqrt(ab) x_k, variance 1-ab.
  const IsotropicGm noised = gm.noised(sched, k);
  Eigen::VectorXd xk_vec(1);
  xk_vec[0] = x_k;
  const Eigen::VectorXd resp = noised.responsibilities(xk_vec);
  const double post_sd = std::sqrt(1.0 - ab_k);
  Eigen::VectorXd post_means(gm.components());
  for (int i = 0; i < gm.components(); ++i)
    post_means[i] =
        (1.0 - ab_k) * gm.means()(i, 0) + std::sqrt(ab_k) * x_k;
  const double xhat = resp.dot(post_means);

  std::vector<double> bridged_exact(n_samples), bridged_point(n_samples);
  double rhs_acc = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const int c = rng.categorical(resp);
    const double x0 = post_means[c] + post_sd * rng.normal();
    const double eps = rng.normal();
    bridged_exact[i] = bc.x0_coef * x0 + bc.xk_coef * x_k + sig * eps;
    bridged_point[i] = bc.x0_coef * xhat + bc.xk_coef * x_k + sig * eps;
    const double g = xhat - x0;
    rhs_acc += g * g;
  }

  PropA1Result out;
  out.factor = bc.x0_coef;  // sqrt(ab_l) (1 - ab_k/ab_l) / (1 - ab_k)
  out.lhs = wasserstein_1d(std::move(bridged_point), std::move(bridged_exact));
  out.rhs = out.factor * std::sqrt(rhs_acc / n_samples);
  return out;
}

ReplicateSummary summarize(const std::vector<RunValue>& runs) {
  if (runs.size() < 2)
    throw std::invalid_argument("summary requires at least two runs");
  ReplicateSummary out;
  out.n_runs = static_cast<int>(runs.size());
  double sum = 0.0;
  for (const auto& r : runs) {
    const double v = r.failed ? kFailedRunValue : r.value;
    sum += v;
    if (r.failed) ++out.n_failed;
  }
  out.mean = sum / out.n_runs;
  double ss = 0.0;
  for (const auto& r : runs) {
    const double v = r.failed ? kFailedRunValue : r.value;
    ss += (v - out.mean) * (v - out.mean);
  }
  const double sd = std::sqrt(ss / (out.n_runs - 1));
  out.ci_halfwidth = 1.96 * sd / std::sqrt(static_cast<double>(out.n_runs));
  return out;
}

}  // namespace dcps
