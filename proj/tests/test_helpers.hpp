#pragma once

// Test-only oracles: brute-force and dense linear-algebra reference paths
// kept independent of the library implementations they check.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "refinery/domain.hpp"
#include "refinery/gp.hpp"
#include "refinery/gmm.hpp"

namespace testoracle {

// Dense GP reference: explicit inverse of K + diag(noise) + jitter I,
// no Cholesky reuse.
struct DenseGP {
  Eigen::MatrixXd Kinv;
  Eigen::VectorXd alpha;
  double mean_const;
  Eigen::MatrixXd X;
  refinery::KernelParams params;
  double logdet;

  DenseGP(const Eigen::MatrixXd& X_, const Eigen::VectorXd& y,
          const Eigen::VectorXd& noise, const refinery::KernelParams& p,
          double mean, double jitter)
      : mean_const(mean), X(X_), params(p) {
    const int n = static_cast<int>(X.rows());
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        K(i, j) = refinery::kernel(X.row(i).transpose(), X.row(j).transpose(), p);
    K += noise.asDiagonal();
    K.diagonal().array() += jitter;
    Kinv = K.inverse();
    alpha = Kinv * (y - Eigen::VectorXd::Constant(n, mean));
    logdet = std::log(K.determinant());
  }

  std::pair<double, double> predict(const Eigen::VectorXd& q) const {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i)
      ks[i] = refinery::kernel(X.row(i).transpose(), q, params);
    const double mean = mean_const + ks.dot(alpha);
    double var = refinery::kernel(q, q, params) - ks.dot(Kinv * ks);
    return {mean, std::sqrt(std::max(var, 0.0))};
  }

  double lml(const Eigen::VectorXd& y) const {
    const int n = static_cast<int>(X.rows());
    Eigen::VectorXd r = y - Eigen::VectorXd::Constant(n, mean_const);
    return -0.5 * r.dot(alpha) - 0.5 * logdet -
           0.5 * n * std::log(2.0 * M_PI);
  }
};

// Standard normal CDF by midpoint quadrature of the density, independent of
// any erf-based path.
inline double cdf_by_quadrature(double z, int steps = 200000) {
  // Integrate from -12 (below double-precision tail mass) to z.
  const double lo = -12.0;
  if (z <= lo) return 0.0;
  const double h = (z - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = lo + (i + 0.5) * h;
    acc += std::exp(-0.5 * x * x);
  }
  return acc * h / std::sqrt(2.0 * M_PI);
}

// Naive (non-log-space) mixture density.
inline double naive_gmm_density(const refinery::GMMModel& m,
                                const Eigen::VectorXd& x) {
  const int d = m.dim();
  double total = 0.0;
  for (int c = 0; c < m.components(); ++c) {
    const Eigen::MatrixXd& cov = m.covariances[c];
    const Eigen::VectorXd diff = x - m.means[c];
    const double quad = diff.dot(cov.inverse() * diff);
    const double norm =
        std::pow(2.0 * M_PI, -0.5 * d) / std::sqrt(cov.determinant());
    total += m.weights[c] * norm * std::exp(-0.5 * quad);
  }
  return total;
}

// Mixture log-likelihood of a point set under a fitted model, the naive way.
inline double naive_gmm_loglik(const refinery::GMMModel& m,
                               const std::vector<refinery::InitState>& pts) {
  double ll = 0.0;
  for (const auto& p : pts) ll += std::log(naive_gmm_density(m, p));
  return ll;
}

inline double bic_of(double loglik, int k, int d, int n) {
  const double params = (k - 1) + k * d + k * d * (d + 1) / 2.0;
  return -2.0 * loglik + params * std::log(static_cast<double>(n));
}

}  // namespace testoracle
