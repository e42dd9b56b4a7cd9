#include "refinery/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace refinery {

namespace {

constexpr double kNoiseFloor = 1e-4;
constexpr double kMaxJitter = 1e-2;
constexpr int kMaxTrainSize = 2000;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void validate_params(const KernelParams& p, int dim) {
  if (p.lengthscales.size() != dim)
    throw std::invalid_argument("lengthscale count does not match dimension");
  if (!(p.signal_variance > 0.0) || !std::isfinite(p.signal_variance))
    throw std::invalid_argument("signal_variance must be positive and finite");
  for (int j = 0; j < dim; ++j) {
    if (!(p.lengthscales[j] > 0.0) || !std::isfinite(p.lengthscales[j]))
      throw std::invalid_argument("lengthscales must be positive and finite");
  }
  if (!(p.jitter > 0.0)) throw std::invalid_argument("jitter must be positive");
}

Eigen::MatrixXd build_gram(const Eigen::MatrixXd& X, const KernelParams& p) {
  // Scale once so the squared distance reduces to a plain Gram trick.
  Eigen::MatrixXd Z = X * p.lengthscales.cwiseInverse().asDiagonal();
  Eigen::VectorXd sq = Z.rowwise().squaredNorm();
  Eigen::MatrixXd D =
      sq.replicate(1, Z.rows()) + sq.transpose().replicate(Z.rows(), 1) -
      2.0 * Z * Z.transpose();
  return p.signal_variance * (-0.5 * D.cwiseMax(0.0)).array().exp();
}

// Core solve shared by fit() and the hyperparameter search.
GPModel factorize(GPModel m) {
  const int n = m.n();
  Eigen::MatrixXd K = build_gram(m.train_X, m.params);
  K.diagonal() += m.noise_var;

  double jitter = m.params.jitter;
  while (true) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Kj);
    if (llt.info() == Eigen::Success) {
      m.chol_L = llt.matrixL();
      m.jitter_used = jitter;
      Eigen::VectorXd resid =
          m.train_y - Eigen::VectorXd::Constant(n, m.mean_const);
      m.alpha = llt.solve(resid);
      return m;
    }
    if (jitter >= kMaxJitter)
      throw std::runtime_error("GP gram matrix not factorizable at max jitter");
    jitter *= 10.0;
  }
}

GPModel assemble(const EvalDataset& ds, const KernelParams& p) {
  std::vector<const EvalRecord*> usable;
  for (const auto& r : ds.records)
    if (r.trials >= 1) usable.push_back(&r);
  if (usable.empty())
    throw std::invalid_argument("GP fit needs at least one record with trials");
  if (static_cast<int>(usable.size()) > kMaxTrainSize)
    throw std::invalid_argument("GP training sets are capped at 2000 records");

  const int n = static_cast<int>(usable.size());
  const int d = ds.domain.dim();
  GPModel m;
  m.params = p;
  m.domain = ds.domain;
  m.train_X.resize(n, d);
  m.train_y.resize(n);
  m.noise_var.resize(n);
  std::int64_t trials = 0, succ = 0;
  for (int i = 0; i < n; ++i) {
    const EvalRecord& r = *usable[i];
    if (r.state.size() != d)
      throw std::invalid_argument("record dimension does not match domain");
    m.train_X.row(i) = r.state.transpose();
    double rate = static_cast<double>(r.successes) / r.trials;
    if (!std::isfinite(rate))
      throw std::invalid_argument("non-finite GP target");
    m.train_y[i] = rate;
    m.noise_var[i] = rate * (1.0 - rate) / r.trials + kNoiseFloor;
    trials += r.trials;
    succ += r.successes;
  }
  m.mean_const = static_cast<double>(succ) / static_cast<double>(trials);
  return m;
}

}  // namespace

double kernel(const InitState& a, const InitState& b, const KernelParams& p) {
  if (a.size() != b.size())
    throw std::invalid_argument("kernel arguments differ in dimension");
  validate_params(p, static_cast<int>(a.size()));
  double s = ((a - b).cwiseQuotient(p.lengthscales)).squaredNorm();
  return p.signal_variance * std::exp(-0.5 * s);
}

GPModel fit(const EvalDataset& ds, const KernelParams& p) {
  validate_params(p, ds.domain.dim());
  return factorize(assemble(ds, p));
}

GPModel fit_arrays(const Domain& domain, Eigen::MatrixXd X, Eigen::VectorXd y,
                   Eigen::VectorXd noise_var, const KernelParams& p,
                   double mean_const) {
  validate_params(p, domain.dim());
  if (X.rows() != y.size() || X.rows() != noise_var.size() || X.rows() < 1)
    throw std::invalid_argument("inconsistent GP training arrays");
  GPModel m;
  m.params = p;
  m.domain = domain;
  m.train_X = std::move(X);
  m.train_y = std::move(y);
  m.noise_var = std::move(noise_var);
  m.mean_const = mean_const;
  return factorize(std::move(m));
}

GPModel fit_auto(const EvalDataset& ds, RngStream rng) {
  const int d = ds.domain.dim();
  const Eigen::VectorXd width = ds.domain.width();
  GPModel proto;  // targets/noise are independent of hyperparameters
  {
    KernelParams seed;
    seed.lengthscales = width;
    proto = assemble(ds, seed);
  }

  auto lml_at = [&](const Eigen::VectorXd& log_theta) {
    KernelParams p;
    p.lengthscales = log_theta.head(d).array().exp();
    p.signal_variance = std::exp(log_theta[d]);
    GPModel m = proto;
    m.params = p;
    return log_marginal_likelihood(factorize(std::move(m)));
  };

  // Multi-start: d lengthscales then the signal variance, all in log space.
  Eigen::VectorXd best(d + 1);
  double best_lml = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < 32; ++s) {
    Eigen::VectorXd lt(d + 1);
    for (int j = 0; j < d; ++j)
      lt[j] = rng.next_double(std::log(0.05 * width[j]), std::log(2.0 * width[j]));
    lt[d] = rng.next_double(std::log(0.01), std::log(1.0));
    double v = lml_at(lt);
    if (v > best_lml) {
      best_lml = v;
      best = lt;
    }
  }

  // Per-coordinate golden-section refinement: each iteration shrinks one
  // coordinate's bracket by the golden ratio, cycling over coordinates.
  const double gr = 0.61803398874989484820;
  Eigen::VectorXd lo = best.array() - std::log(16.0);
  Eigen::VectorXd hi = best.array() + std::log(16.0);
  for (int it = 0; it < 100; ++it) {
    const int c = it % (d + 1);
    Eigen::VectorXd p1 = best, p2 = best;
    p1[c] = hi[c] - gr * (hi[c] - lo[c]);
    p2[c] = lo[c] + gr * (hi[c] - lo[c]);
    const double v1 = lml_at(p1);
    const double v2 = lml_at(p2);
    if (v1 >= v2) {
      hi[c] = p2[c];
      if (v1 > best_lml) {
        best_lml = v1;
        best = p1;
      }
    } else {
      lo[c] = p1[c];
      if (v2 > best_lml) {
        best_lml = v2;
        best = p2;
      }
    }
  }

  KernelParams p;
  p.lengthscales = best.head(d).array().exp();
  p.signal_variance = std::exp(best[d]);
  GPModel m = proto;
  m.params = p;
  return factorize(std::move(m));
}

std::pair<double, double> predict(const GPModel& m, const InitState& q) {
  if (q.size() != m.dim())
    throw std::invalid_argument("query dimension does not match model");
  const int n = m.n();
  Eigen::VectorXd ks(n);
  Eigen::VectorXd scaled_q = q.cwiseQuotient(m.params.lengthscales);
  for (int i = 0; i < n; ++i) {
    double s = (m.train_X.row(i).transpose().cwiseQuotient(m.params.lengthscales) -
                scaled_q)
                   .squaredNorm();
    ks[i] = m.params.signal_variance * std::exp(-0.5 * s);
  }
  const double mean = m.mean_const + ks.dot(m.alpha);
  Eigen::VectorXd v =
      m.chol_L.triangularView<Eigen::Lower>().solve(ks);
  double var = m.params.signal_variance - v.squaredNorm();
  if (var < 0.0) var = 0.0;
  return {mean, std::sqrt(var)};
}

double log_marginal_likelihood(const GPModel& m) {
  const int n = m.n();
  Eigen::VectorXd resid =
      m.train_y - Eigen::VectorXd::Constant(n, m.mean_const);
  double logdet = m.chol_L.diagonal().array().log().sum();
  return -0.5 * resid.dot(m.alpha) - logdet - 0.5 * n * kLogTwoPi;
}

}  // namespace refinery
