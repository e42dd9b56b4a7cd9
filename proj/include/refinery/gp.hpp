#pragma once

#include <Eigen/Dense>
#include <utility>

#include "refinery/domain.hpp"

namespace refinery {

/// Squared-exponential ARD kernel hyperparameters. All entries strictly
/// positive and finite.
struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;  // one per dimension
  double jitter = 1e-6;
};

/// Exact GP regression model over success rates, with per-point
/// (heteroscedastic) observation noise and a constant prior mean.
struct GPModel {
  KernelParams params;
  double mean_const = 0.0;
  Domain domain;
  Eigen::MatrixXd train_X;    // n x d, one probe location per row
  Eigen::VectorXd train_y;    // empirical success rates
  Eigen::VectorXd noise_var;  // binomial variance + floor, per point
  Eigen::MatrixXd chol_L;     // lower factor of K + diag(noise) + jitter*I
  Eigen::VectorXd alpha;      // (K + noise)^-1 (y - mean)
  double jitter_used = 0.0;   // after any escalation

  int n() const { return static_cast<int>(train_X.rows()); }
  int dim() const { return static_cast<int>(train_X.cols()); }
};

/// k(a, b) = sv * exp(-1/2 sum_j ((a_j-b_j)/l_j)^2).
double kernel(const InitState& a, const InitState& b, const KernelParams& p);

/// Fit with fixed hyperparameters. mean_const is the pooled success rate and
/// noise_var[i] = r_i(1-r_i)/trials_i + 1e-4. Records with zero trials carry
/// no rate and are skipped. The Cholesky jitter is escalated x10 up to 1e-2
/// if factorization fails. Training sets beyond 2000 records are rejected.
GPModel fit(const EvalDataset& ds, const KernelParams& p);

/// Fit with hyperparameters chosen by log-marginal-likelihood search:
/// 32 multi-start draws in log space (lengthscales in [0.05, 2] x domain
/// width, signal variance in [0.01, 1]) followed by 100 golden-section
/// refinement iterations cycling over coordinates. Deterministic given rng.
GPModel fit_auto(const EvalDataset& ds, RngStream rng);

/// Fit from raw arrays with fixed hyperparameters and prior mean. Used for
/// posterior updates that append pseudo-observations.
GPModel fit_arrays(const Domain& domain, Eigen::MatrixXd X, Eigen::VectorXd y,
                   Eigen::VectorXd noise_var, const KernelParams& p,
                   double mean_const);

/// Posterior mean and standard deviation at q. Variance is clamped at zero
/// after floating-point cancellation.
std::pair<double, double> predict(const GPModel& m, const InitState& q);

/// -1/2 (y-m)^T alpha - sum log diag(L) - n/2 log(2 pi).
double log_marginal_likelihood(const GPModel& m);

}  // namespace refinery
