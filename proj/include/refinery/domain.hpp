#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "refinery/rng.hpp"

namespace refinery {

/// A point in the initialization space.
using InitState = Eigen::VectorXd;

/// Axis-aligned box of legal initializations. lower[j] < upper[j] for all j,
/// 1 <= dim <= 16.
struct Domain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Domain() = default;
  Domain(Eigen::VectorXd lo, Eigen::VectorXd hi);

  int dim() const { return static_cast<int>(lower.size()); }
  Eigen::VectorXd width() const { return upper - lower; }
  double mean_width() const { return (upper - lower).mean(); }

  bool contains(const InitState& x) const;

  /// Nearest in-box point (componentwise clamp).
  InitState clamp(const InitState& x) const;

  /// Unit box [0,1]^d.
  static Domain unit(int d);
};

/// Rollout outcomes aggregated at one probe location.
struct EvalRecord {
  InitState state;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
};

struct EvalDataset {
  Domain domain;
  std::vector<EvalRecord> records;

  std::int64_t total_trials() const;
  std::int64_t total_successes() const;
};

/// n i.i.d. uniform points in the box; deterministic given rng.
std::vector<InitState> uniform_sample(const Domain& domain, int n,
                                      RngStream rng);

/// Pooled successes/trials. Throws std::invalid_argument("no trials") on an
/// empty dataset.
double success_rate(const EvalDataset& ds);

}  // namespace refinery
