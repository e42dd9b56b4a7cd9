#pragma once

#include <Eigen/Dense>
#include <vector>

#include "refinery/domain.hpp"

namespace refinery {

/// Full-covariance Gaussian mixture. Weights sum to one; every covariance
/// is kept factorizable by a 1e-6 ridge applied at each M-step.
struct GMMModel {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;

  // Derived per-component terms, rebuilt whenever the covariances change.
  std::vector<Eigen::MatrixXd> chol;  // lower factors
  Eigen::VectorXd log_norm;           // -d/2 log(2pi) - sum log diag(L)

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }
};

/// Recompute factorizations and normalization constants.
void refresh_factorization(GMMModel& m);

struct EmResult {
  GMMModel model;
  double loglik = 0.0;
};

/// k-means++ seeded EM with 4 seeded restarts; the best log-likelihood wins,
/// earlier restart on ties. Stops when |delta loglik| < 1e-6 or after 200
/// iterations; responsibilities are computed in log space.
///
/// Fewer than d+1 points fall back to a single spherical component (not an
/// error); fewer points than requested components is an error. When
/// ll_traces is given it receives one per-iteration log-likelihood sequence
/// per restart.
EmResult fit_em(const std::vector<InitState>& points, int k, RngStream rng,
                std::vector<std::vector<double>>* ll_traces = nullptr);

double log_density(const GMMModel& m, const InitState& x);

/// sum_k w_k N(x | mu_k, Sigma_k) via log-sum-exp, floored at the smallest
/// positive double so the result stays strictly positive.
double density(const GMMModel& m, const InitState& x);

/// Ancestral sampling: categorical component draw, then an affine transform
/// of standard normals through the Cholesky factor.
std::vector<InitState> sample(const GMMModel& m, int n, RngStream rng);

/// Fit K in {1..min(k_max, n/(d+1))} and keep the minimum-BIC model,
/// BIC = -2 loglik + p log n with p = K-1 + K d + K d(d+1)/2. Ties go to
/// the smaller K.
GMMModel select_k(const std::vector<InitState>& points, int k_max,
                  RngStream rng);

struct DeploySelection {
  InitState point;
  double density = 0.0;
  int candidates = 0;     // in-domain candidates considered
  bool fallback = false;  // no in-domain sample was drawn
};

/// Algorithm-2 style selector: draw until M in-domain candidates (at most
/// 10 M draws), return the one with the highest mixture density; first drawn
/// wins ties. If every draw lands outside the domain, returns the in-domain
/// point nearest the highest-weight mean. When `accepted` is non-null it
/// receives the in-domain candidate set, for exhaustive-scan verification.
DeploySelection deploy_select_detailed(const GMMModel& m, int M,
                                       const Domain& domain, RngStream rng,
                                       std::vector<InitState>* accepted = nullptr);

InitState deploy_select(const GMMModel& m, int M, const Domain& domain,
                        RngStream rng);

}  // namespace refinery
