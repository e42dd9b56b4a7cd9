#include "refinery/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace refinery {

namespace {
constexpr double kZClamp = 8.0;
constexpr double kInvSqrtTwoPi = 0.39894228040143267793994605993438;
constexpr double kInvSqrtTwo = 0.70710678118654752440084436210485;
constexpr double kLiarNoise = 1e-4;
}  // namespace

AcquisitionKind acquisition_kind_from_string(const std::string& name) {
  if (name == "ucb") return AcquisitionKind::kUcb;
  if (name == "pi") return AcquisitionKind::kPi;
  if (name == "ei") return AcquisitionKind::kEi;
  throw std::invalid_argument("unknown acquisition kind: \"" + name +
                              "\" (expected ucb, pi, or ei)");
}

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::kUcb: return "ucb";
    case AcquisitionKind::kPi: return "pi";
    case AcquisitionKind::kEi: return "ei";
  }
  return "?";
}

double normal_cdf(double z) {
  if (z <= -kZClamp) return 0.0;
  if (z >= kZClamp) return 1.0;
  return 0.5 * std::erfc(-z * kInvSqrtTwo);
}

double normal_pdf(double z) {
  if (z <= -kZClamp || z >= kZClamp) return 0.0;
  return kInvSqrtTwoPi * std::exp(-0.5 * z * z);
}

double ucb(double mean, double std, double beta) { return mean + beta * std; }

double pi(double mean, double std, double incumbent) {
  if (std <= 0.0) return mean > incumbent ? 1.0 : 0.0;
  return normal_cdf((mean - incumbent) / std);
}

double ei(double mean, double std, double incumbent) {
  const double gain = mean - incumbent;
  if (std <= 0.0) return std::max(gain, 0.0);
  const double z = gain / std;
  const double v = gain * normal_cdf(z) + std * normal_pdf(z);
  // Analytically EI >= max(gain, 0); restore the bound after rounding.
  return std::max({v, gain, 0.0});
}

double acquisition_score(const AcquisitionSpec& spec, double mean, double std,
                         double incumbent) {
  switch (spec.kind) {
    case AcquisitionKind::kUcb: return ucb(mean, std, spec.beta);
    case AcquisitionKind::kPi: return pi(mean, std, incumbent);
    case AcquisitionKind::kEi: return ei(mean, std, incumbent);
  }
  throw std::invalid_argument("invalid acquisition kind");
}

ProposalBatch propose(const GPModel& m, const AcquisitionSpec& spec,
                      const Domain& domain, int batch, int candidates,
                      RngStream rng) {
  if (m.n() < 1) throw std::invalid_argument("propose requires a fitted model");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (candidates < batch)
    throw std::invalid_argument("candidate count must be >= batch size");
  if (domain.dim() != m.dim())
    throw std::invalid_argument("domain does not match the fitted model");
  if (!(spec.beta >= 0.0) || !std::isfinite(spec.beta))
    throw std::invalid_argument("beta must be finite and non-negative");

  std::vector<InitState> pool = uniform_sample(domain, candidates, rng);
  for (int i = 0; i < m.n(); ++i)
    pool.push_back(m.train_X.row(i).transpose());

  const double incumbent = m.train_y.maxCoeff();
  GPModel work = m;
  std::vector<char> taken(pool.size(), 0);

  ProposalBatch out;
  for (int b = 0; b < batch; ++b) {
    int best_idx = -1;
    double best_score = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (taken[i]) continue;
      auto [mu, sigma] = predict(work, pool[i]);
      double s = acquisition_score(spec, mu, sigma, incumbent);
      if (best_idx < 0 || s > best_score) {
        best_idx = static_cast<int>(i);
        best_score = s;
      }
    }
    taken[best_idx] = 1;
    out.points.push_back(pool[best_idx]);
    out.scores.push_back(best_score);

    if (b + 1 == batch) break;
    // Constant liar: pretend the pick came back at the incumbent rate.
    const int n = work.n();
    Eigen::MatrixXd X(n + 1, work.dim());
    X.topRows(n) = work.train_X;
    X.row(n) = pool[best_idx].transpose();
    Eigen::VectorXd y(n + 1), nv(n + 1);
    y.head(n) = work.train_y;
    y[n] = incumbent;
    nv.head(n) = work.noise_var;
    nv[n] = kLiarNoise;
    work = fit_arrays(work.domain, std::move(X), std::move(y), std::move(nv),
                      work.params, work.mean_const);
  }
  return out;
}

}  // namespace refinery
