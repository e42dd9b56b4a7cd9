#include "refinery/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace refinery {

double true_prob(const OracleField& f, const InitState& theta) {
  if (!f.domain.contains(theta))
    throw std::invalid_argument("true_prob query outside the domain");
  double base = 0.0;
  for (const auto& b : f.bumps) {
    const double d2 = (theta - b.center).squaredNorm();
    base += b.amplitude * std::exp(-d2 / (2.0 * b.width * b.width));
  }
  double p = std::min(std::max(base, f.p_min), f.p_max);
  // Boosts close a fraction of the remaining gap, in application order.
  for (const auto& t : f.boosts) {
    const double d2 = (theta - t.center).squaredNorm();
    p += t.strength * std::exp(-d2 / (2.0 * t.width * t.width)) * (f.p_max - p);
  }
  return p;
}

void StageSpec::validate() const {
  if (eval_noise.size() != oracle.domain.dim())
    throw std::invalid_argument("eval_noise dimension mismatch");
  const Eigen::VectorXd w = oracle.domain.width();
  for (int j = 0; j < eval_noise.size(); ++j) {
    if (!(eval_noise[j] >= 0.0) || !(eval_noise[j] < w[j]))
      throw std::invalid_argument(
          "eval_noise half-widths must be >= 0 and below the domain width");
  }
}

EvalRecord rollout(const StageSpec& s, const InitState& theta, int trials,
                   RngStream rng) {
  if (trials < 1) throw std::invalid_argument("rollout requires trials >= 1");
  s.validate();
  if (!s.oracle.domain.contains(theta))
    throw std::invalid_argument("rollout initialization outside the domain");
  const int d = s.oracle.domain.dim();
  std::int64_t successes = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream trial_rng = rng.substream(t);
    InitState x = theta;
    for (int j = 0; j < d; ++j)
      x[j] += trial_rng.next_double(-s.eval_noise[j], s.eval_noise[j]);
    x = s.oracle.domain.clamp(x);
    if (trial_rng.next_double() < true_prob(s.oracle, x)) ++successes;
  }
  return EvalRecord{theta, trials, successes};
}

OracleField finetune_update(const OracleField& f, const ProposalBatch& batch,
                            double eta, double ell_ft) {
  if (!(eta > 0.0) || !(eta <= 1.0))
    throw std::invalid_argument("eta must be in (0, 1]");
  if (!(ell_ft > 0.0))
    throw std::invalid_argument("ell_ft must be positive");
  OracleField out = f;
  for (const auto& p : batch.points)
    out.boosts.push_back(BoostTerm{p, eta, ell_ft});
  return out;
}

SuccessMap success_map(const OracleField& f, const std::vector<int>& resolution,
                       const std::vector<std::optional<double>>& slice) {
  const int d = f.domain.dim();
  if (static_cast<int>(slice.size()) != d ||
      static_cast<int>(resolution.size()) != d)
    throw std::invalid_argument("slice/resolution size must match dimension");
  SuccessMap map;
  int free_count = 0;
  for (int j = 0; j < d; ++j) {
    if (slice[j].has_value()) continue;
    if (free_count == 0) map.dim_a = j;
    if (free_count == 1) map.dim_b = j;
    ++free_count;
  }
  if (free_count != 2)
    throw std::invalid_argument("success_map needs exactly 2 free dimensions");
  map.res_a = resolution[map.dim_a];
  map.res_b = resolution[map.dim_b];
  if (map.res_a < 1 || map.res_b < 1)
    throw std::invalid_argument("grid resolution must be >= 1");

  InitState theta(d);
  for (int j = 0; j < d; ++j) {
    if (!slice[j].has_value()) continue;
    if (*slice[j] < f.domain.lower[j] || *slice[j] > f.domain.upper[j])
      throw std::invalid_argument("slice value outside the domain");
    theta[j] = *slice[j];
  }

  const auto center = [&](int j, int i, int res) {
    const double w = (f.domain.upper[j] - f.domain.lower[j]) / res;
    return f.domain.lower[j] + (i + 0.5) * w;
  };
  map.values.resize(static_cast<std::size_t>(map.res_a) * map.res_b);
  for (int ib = 0; ib < map.res_b; ++ib) {
    theta[map.dim_b] = center(map.dim_b, ib, map.res_b);
    for (int ia = 0; ia < map.res_a; ++ia) {
      theta[map.dim_a] = center(map.dim_a, ia, map.res_a);
      map.values[static_cast<std::size_t>(ib) * map.res_a + ia] =
          true_prob(f, theta);
    }
  }
  return map;
}

OracleField make_landscape(const Domain& domain, RngStream rng) {
  OracleField f;
  f.domain = domain;
  f.p_min = 0.02;
  f.p_max = 0.99;
  const double w = domain.mean_width();
  const int n_bumps = 1 + static_cast<int>(rng.next_below(4));
  for (int b = 0; b < n_bumps; ++b) {
    GaussianBump bump;
    bump.center = uniform_sample(domain, 1, rng.substream(100 + b)).front();
    bump.amplitude = rng.next_double(0.4, 0.95);
    bump.width = rng.next_double(0.1 * w, 0.3 * w);
    f.bumps.push_back(std::move(bump));
  }
  return f;
}

}  // namespace refinery
