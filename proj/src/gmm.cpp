#include "refinery/gmm.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace refinery {

namespace {

constexpr double kRidge = 1e-6;
constexpr double kEmTol = 1e-6;
constexpr int kEmMaxIter = 200;
constexpr int kRestarts = 4;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void check_points(const std::vector<InitState>& points) {
  if (points.empty()) throw std::invalid_argument("no points to fit");
  const auto d = points[0].size();
  for (const auto& p : points)
    if (p.size() != d)
      throw std::invalid_argument("points differ in dimension");
}

Eigen::MatrixXd as_matrix(const std::vector<InitState>& points) {
  const int n = static_cast<int>(points.size());
  const int d = static_cast<int>(points[0].size());
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) X.row(i) = points[i].transpose();
  return X;
}

// log N(x | mu_k, Sigma_k) for every component, written into lp.
void component_log_pdfs(const GMMModel& m, const InitState& x,
                        Eigen::VectorXd& lp) {
  const int k = m.components();
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd w = m.chol[c].triangularView<Eigen::Lower>().solve(
        x - m.means[c]);
    lp[c] = m.log_norm[c] - 0.5 * w.squaredNorm();
  }
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// E-step over all points: returns the data log-likelihood and fills the
// responsibility matrix (n x k).
double e_step(const GMMModel& m, const Eigen::MatrixXd& X,
              Eigen::MatrixXd& resp) {
  const int n = static_cast<int>(X.rows());
  const int k = m.components();
  Eigen::VectorXd lw = m.weights.array().log();
  Eigen::VectorXd lp(k);
  double ll = 0.0;
  for (int i = 0; i < n; ++i) {
    component_log_pdfs(m, X.row(i).transpose(), lp);
    lp += lw;
    const double li = log_sum_exp(lp);
    ll += li;
    resp.row(i) = (lp.array() - li).exp();
  }
  return ll;
}

void m_step(const Eigen::MatrixXd& X, const Eigen::MatrixXd& resp,
            GMMModel& m) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int k = m.components();
  for (int c = 0; c < k; ++c) {
    const double nk = resp.col(c).sum();
    if (nk < 1e-12) {
      // Starved component: keep its parameters, park the weight at a floor.
      m.weights[c] = 1e-12;
      continue;
    }
    m.weights[c] = nk / n;
    Eigen::VectorXd mu = (X.transpose() * resp.col(c)) / nk;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd dx = X.row(i).transpose() - mu;
      cov.noalias() += resp(i, c) * dx * dx.transpose();
    }
    cov /= nk;
    cov.diagonal().array() += kRidge;
    m.means[c] = std::move(mu);
    m.covariances[c] = std::move(cov);
  }
  m.weights /= m.weights.sum();
  refresh_factorization(m);
}

// D^2-weighted k-means++ seeds.
std::vector<int> kmeanspp_seeds(const Eigen::MatrixXd& X, int k,
                                RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  std::vector<int> seeds;
  seeds.push_back(static_cast<int>(rng.next_below(n)));
  Eigen::VectorXd d2 =
      (X.rowwise() - X.row(seeds[0])).rowwise().squaredNorm();
  while (static_cast<int>(seeds.size()) < k) {
    const double total = d2.sum();
    int pick;
    if (total <= 0.0) {
      pick = static_cast<int>(rng.next_below(n));
    } else {
      double u = rng.next_double() * total;
      pick = n - 1;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    seeds.push_back(pick);
    d2 = d2.cwiseMin((X.rowwise() - X.row(pick)).rowwise().squaredNorm());
  }
  return seeds;
}

GMMModel initial_model(const Eigen::MatrixXd& X, int k, RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  GMMModel m;
  m.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / n;
  cov.diagonal().array() += kRidge;
  const auto seeds = kmeanspp_seeds(X, k, rng);
  for (int c = 0; c < k; ++c) {
    m.means.push_back(X.row(seeds[c]).transpose());
    m.covariances.push_back(cov);
  }
  refresh_factorization(m);
  return m;
}

EmResult single_gaussian(const Eigen::MatrixXd& X, bool spherical) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  GMMModel m;
  m.weights = Eigen::VectorXd::Ones(1);
  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mean;
  m.means.push_back(mean.transpose());
  if (spherical) {
    const double var = centered.squaredNorm() / (n * d) + kRidge;
    m.covariances.push_back(var * Eigen::MatrixXd::Identity(d, d));
  } else {
    Eigen::MatrixXd cov = centered.transpose() * centered / n;
    cov.diagonal().array() += kRidge;
    m.covariances.push_back(cov);
  }
  refresh_factorization(m);
  Eigen::MatrixXd resp(n, 1);
  EmResult r;
  r.loglik = e_step(m, X, resp);
  r.model = std::move(m);
  return r;
}

}  // namespace

void refresh_factorization(GMMModel& m) {
  const int k = m.components();
  const int d = m.dim();
  m.chol.resize(k);
  m.log_norm.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::MatrixXd cov = m.covariances[c];
    double ridge = 0.0;
    while (true) {
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) {
        m.chol[c] = llt.matrixL();
        break;
      }
      ridge = ridge == 0.0 ? kRidge : ridge * 10.0;
      if (ridge > 1e-2)
        throw std::runtime_error("GMM covariance not factorizable");
      cov = m.covariances[c];
      cov.diagonal().array() += ridge;
    }
    m.log_norm[c] =
        -0.5 * d * kLogTwoPi - m.chol[c].diagonal().array().log().sum();
  }
}

EmResult fit_em(const std::vector<InitState>& points, int k, RngStream rng,
                std::vector<std::vector<double>>* ll_traces) {
  check_points(points);
  if (k < 1) throw std::invalid_argument("component count must be >= 1");
  const int n = static_cast<int>(points.size());
  const int d = static_cast<int>(points[0].size());
  Eigen::MatrixXd X = as_matrix(points);

  if (n < d + 1) {
    // Too few points for a full covariance; single spherical component.
    EmResult r = single_gaussian(X, /*spherical=*/true);
    if (ll_traces) ll_traces->push_back({r.loglik});
    return r;
  }
  if (n < k)
    throw std::invalid_argument("fewer points than mixture components");
  if (k == 1) {
    EmResult r = single_gaussian(X, /*spherical=*/false);
    if (ll_traces) ll_traces->push_back({r.loglik});
    return r;
  }

  EmResult best;
  best.loglik = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < kRestarts; ++restart) {
    RngStream rr = rng.substream(restart);
    GMMModel m = initial_model(X, k, rr);
    Eigen::MatrixXd resp(n, k);
    std::vector<double> trace;
    double ll_prev = -std::numeric_limits<double>::infinity();
    double ll = ll_prev;
    for (int iter = 0; iter < kEmMaxIter; ++iter) {
      ll = e_step(m, X, resp);
      trace.push_back(ll);
      assert(ll >= ll_prev - 1e-9);
      if (std::abs(ll - ll_prev) < kEmTol) break;
      ll_prev = ll;
      m_step(X, resp, m);
    }
    if (static_cast<int>(trace.size()) == kEmMaxIter) {
      // Iteration cap hit after an M-step; report the likelihood of the
      // parameters actually returned.
      ll = e_step(m, X, resp);
      trace.push_back(ll);
    }
    if (ll_traces) ll_traces->push_back(std::move(trace));
    if (ll > best.loglik) {
      best.loglik = ll;
      best.model = std::move(m);
    }
  }
  return best;
}

double log_density(const GMMModel& m, const InitState& x) {
  if (x.size() != m.dim())
    throw std::invalid_argument("query dimension does not match mixture");
  Eigen::VectorXd lp(m.components());
  component_log_pdfs(m, x, lp);
  lp += m.weights.array().log().matrix();
  return log_sum_exp(lp);
}

double density(const GMMModel& m, const InitState& x) {
  const double v = std::exp(log_density(m, x));
  return std::max(v, std::numeric_limits<double>::min());
}

std::vector<InitState> sample(const GMMModel& m, int n, RngStream rng) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  const int k = m.components();
  const int d = m.dim();
  std::vector<InitState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    int c = k - 1;
    double acc = 0.0;
    for (int j = 0; j < k; ++j) {
      acc += m.weights[j];
      if (u < acc) {
        c = j;
        break;
      }
    }
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z[j] = rng.next_gaussian();
    out.push_back(m.means[c] + m.chol[c] * z);
  }
  return out;
}

GMMModel select_k(const std::vector<InitState>& points, int k_max,
                  RngStream rng) {
  check_points(points);
  if (points.size() < 2)
    throw std::invalid_argument("select_k needs at least two points");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const int n = static_cast<int>(points.size());
  const int d = static_cast<int>(points[0].size());
  const int hi = std::min<int>(k_max, n / (d + 1));
  if (hi < 1) return fit_em(points, 1, rng).model;  // spherical fallback path

  GMMModel best;
  double best_bic = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= hi; ++k) {
    EmResult r = fit_em(points, k, rng.substream(k));
    const double params = (k - 1) + k * d + k * d * (d + 1) / 2.0;
    const double bic = -2.0 * r.loglik + params * std::log(n);
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(r.model);
    }
  }
  return best;
}

DeploySelection deploy_select_detailed(const GMMModel& m, int M,
                                       const Domain& domain, RngStream rng,
                                       std::vector<InitState>* accepted) {
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (domain.dim() != m.dim())
    throw std::invalid_argument("domain does not match mixture dimension");

  DeploySelection sel;
  double best_ld = -std::numeric_limits<double>::infinity();
  int in_domain = 0;
  // Up to 10 rounds of M draws each; out-of-domain draws are discarded.
  for (int round = 0; round < 10 && in_domain < M; ++round) {
    const auto draws = sample(m, M, rng.substream(round));
    for (const InitState& x : draws) {
      if (!domain.contains(x)) continue;
      ++in_domain;
      if (accepted) accepted->push_back(x);
      const double ld = log_density(m, x);
      if (ld > best_ld) {
        best_ld = ld;
        sel.point = x;
      }
      if (in_domain >= M) break;
    }
  }
  sel.candidates = in_domain;
  if (in_domain == 0) {
    int c_best = 0;
    for (int c = 1; c < m.components(); ++c)
      if (m.weights[c] > m.weights[c_best]) c_best = c;
    sel.point = domain.clamp(m.means[c_best]);
    sel.fallback = true;
  }
  sel.density = density(m, sel.point);
  return sel;
}

InitState deploy_select(const GMMModel& m, int M, const Domain& domain,
                        RngStream rng) {
  return deploy_select_detailed(m, M, domain, rng).point;
}

}  // namespace refinery
