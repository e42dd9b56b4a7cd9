#pragma once

#include <optional>
#include <vector>

#include "refinery/acquisition.hpp"
#include "refinery/domain.hpp"

namespace refinery {

struct GaussianBump {
  InitState center;
  double amplitude = 0.5;  // in (0, 1]
  double width = 0.2;      // > 0
};

/// A localized improvement left behind by one fine-tuning step.
struct BoostTerm {
  InitState center;
  double strength = 0.0;  // learning gain in (0, 1]
  double width = 0.1;
};

/// Ground-truth success-probability field: a sum of Gaussian bumps clamped
/// to [p_min, p_max], plus an ordered list of boosts, each of which closes a
/// fraction of the remaining gap to p_max around its center. Fields are
/// value types; updates return new fields.
struct OracleField {
  Domain domain;
  std::vector<GaussianBump> bumps;
  double p_min = 0.02;
  double p_max = 0.99;
  std::vector<BoostTerm> boosts;
};

/// True success probability at theta; throws if theta is outside the domain.
double true_prob(const OracleField& f, const InitState& theta);

/// One assembly stage: its success field plus the uniform perturbation
/// applied to nominal initializations at rollout time.
struct StageSpec {
  OracleField oracle;
  int label = 0;
  Eigen::VectorXd eval_noise;  // per-dim half-widths, >= 0 and < width

  void validate() const;
};

/// `trials` Bernoulli rollouts from theta. Each trial perturbs theta by the
/// stage noise (clamped back into the domain) and draws success with the
/// field's probability there. The record keeps the nominal theta.
EvalRecord rollout(const StageSpec& s, const InitState& theta, int trials,
                   RngStream rng);

/// Appends one boost per proposed point:
///   p'(theta) = p(theta) + eta * exp(-|theta - c|^2 / (2 l^2)) * (p_max - p(theta)).
/// Requires eta in (0, 1] and ell_ft > 0. The input field is unchanged.
OracleField finetune_update(const OracleField& f, const ProposalBatch& batch,
                            double eta, double ell_ft);

struct SuccessMap {
  int dim_a = 0, dim_b = 1;    // the two free dimensions
  int res_a = 0, res_b = 0;    // grid resolution along each
  std::vector<double> values;  // row-major: values[ib * res_a + ia]
};

/// Evaluates true_prob over a 2-D slice at cell centers. `resolution` gives
/// the per-dimension grid size; `slice` fixes every non-plotted dimension
/// and leaves exactly two entries empty.
SuccessMap success_map(const OracleField& f, const std::vector<int>& resolution,
                       const std::vector<std::optional<double>>& slice);

/// Seeded benchmark landscape: 1-4 bumps, amplitudes in [0.4, 0.95], widths
/// in [0.1, 0.3] of the mean domain width, centers uniform; p_min = 0.02,
/// p_max = 0.99.
OracleField make_landscape(const Domain& domain, RngStream rng);

}  // namespace refinery
