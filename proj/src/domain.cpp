#include "refinery/domain.hpp"

#include <stdexcept>

namespace refinery {

Domain::Domain(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("domain bound dimensions differ");
  if (lower.size() < 1 || lower.size() > 16)
    throw std::invalid_argument("domain dim must be in [1, 16]");
  for (int j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j]))
      throw std::invalid_argument("domain requires lower[j] < upper[j]");
  }
}

bool Domain::contains(const InitState& x) const {
  if (x.size() != lower.size()) return false;
  for (int j = 0; j < x.size(); ++j) {
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  }
  return true;
}

InitState Domain::clamp(const InitState& x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

Domain Domain::unit(int d) {
  return Domain(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
}

std::int64_t EvalDataset::total_trials() const {
  std::int64_t t = 0;
  for (const auto& r : records) t += r.trials;
  return t;
}

std::int64_t EvalDataset::total_successes() const {
  std::int64_t s = 0;
  for (const auto& r : records) s += r.successes;
  return s;
}

std::vector<InitState> uniform_sample(const Domain& domain, int n,
                                      RngStream rng) {
  if (n < 1) throw std::invalid_argument("uniform_sample requires n >= 1");
  const int d = domain.dim();
  std::vector<InitState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    InitState x(d);
    for (int j = 0; j < d; ++j)
      x[j] = rng.next_double(domain.lower[j], domain.upper[j]);
    out.push_back(std::move(x));
  }
  return out;
}

double success_rate(const EvalDataset& ds) {
  const std::int64_t trials = ds.total_trials();
  if (trials < 1) throw std::invalid_argument("no trials");
  return static_cast<double>(ds.total_successes()) /
         static_cast<double>(trials);
}

}  // namespace refinery
