#include "refinery/serialize.hpp"

#include <cinttypes>
#include <cstdio>

#include "refinery/version.hpp"

namespace refinery {

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r)));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) m.row(r) = vec_from_json(j[r]).transpose();
  return m;
}

std::string format_mean_std(const MeanStd& ms) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f±%.4f", ms.mean, ms.stddev);
  return buf;
}

}  // namespace

void to_json(json& j, const Domain& d) {
  j = json{{"lower", vec_to_json(d.lower)}, {"upper", vec_to_json(d.upper)}};
}

void from_json(const json& j, Domain& d) {
  d = Domain(vec_from_json(j.at("lower")), vec_from_json(j.at("upper")));
}

void to_json(json& j, const EvalRecord& r) {
  j = json{{"coords", vec_to_json(r.state)},
           {"trials", r.trials},
           {"successes", r.successes}};
}

void from_json(const json& j, EvalRecord& r) {
  r.state = vec_from_json(j.at("coords"));
  r.trials = j.at("trials").get<std::int64_t>();
  r.successes = j.at("successes").get<std::int64_t>();
  if (r.trials < 0 || r.successes < 0 || r.successes > r.trials)
    throw std::invalid_argument("record requires 0 <= successes <= trials");
}

void to_json(json& j, const EvalDataset& ds) {
  j = json{{"domain", ds.domain}, {"records", ds.records}};
}

void from_json(const json& j, EvalDataset& ds) {
  ds.domain = j.at("domain").get<Domain>();
  ds.records = j.at("records").get<std::vector<EvalRecord>>();
  for (const auto& r : ds.records)
    if (r.state.size() != ds.domain.dim())
      throw std::invalid_argument("record dimension does not match domain");
}

void to_json(json& j, const KernelParams& p) {
  j = json{{"signal_variance", p.signal_variance},
           {"lengthscales", vec_to_json(p.lengthscales)},
           {"jitter", p.jitter}};
}

void from_json(const json& j, KernelParams& p) {
  p.signal_variance = j.at("signal_variance").get<double>();
  p.lengthscales = vec_from_json(j.at("lengthscales"));
  p.jitter = j.value("jitter", 1e-6);
}

void to_json(json& j, const AcquisitionSpec& s) {
  j = json{{"kind", to_string(s.kind)}, {"beta", s.beta}};
}

void from_json(const json& j, AcquisitionSpec& s) {
  s.kind = acquisition_kind_from_string(j.at("kind").get<std::string>());
  s.beta = j.value("beta", 2.0);
}

json gp_to_json(const GPModel& m) {
  return json{{"params", m.params},
              {"mean_const", m.mean_const},
              {"domain", m.domain},
              {"train_x", mat_to_json(m.train_X)},
              {"train_y", vec_to_json(m.train_y)},
              {"noise_var", vec_to_json(m.noise_var)}};
}

GPModel gp_from_json(const json& j) {
  return fit_arrays(j.at("domain").get<Domain>(), mat_from_json(j.at("train_x")),
                    vec_from_json(j.at("train_y")),
                    vec_from_json(j.at("noise_var")),
                    j.at("params").get<KernelParams>(),
                    j.at("mean_const").get<double>());
}

void to_json(json& j, const GMMModel& m) {
  json means = json::array(), covs = json::array();
  for (const auto& mu : m.means) means.push_back(vec_to_json(mu));
  for (const auto& cov : m.covariances) covs.push_back(mat_to_json(cov));
  j = json{{"weights", vec_to_json(m.weights)},
           {"means", means},
           {"covariances", covs}};
}

void from_json(const json& j, GMMModel& m) {
  m.weights = vec_from_json(j.at("weights"));
  m.means.clear();
  m.covariances.clear();
  for (const auto& mu : j.at("means")) m.means.push_back(vec_from_json(mu));
  for (const auto& cov : j.at("covariances"))
    m.covariances.push_back(mat_from_json(cov));
  if (m.weights.size() == 0 ||
      m.means.size() != static_cast<std::size_t>(m.weights.size()) ||
      m.covariances.size() != m.means.size())
    throw std::invalid_argument("inconsistent mixture serialization");
  if (std::abs(m.weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights must sum to 1");
  refresh_factorization(m);
}

void to_json(json& j, const GaussianBump& b) {
  j = json{{"center", vec_to_json(b.center)},
           {"amplitude", b.amplitude},
           {"width", b.width}};
}

void from_json(const json& j, GaussianBump& b) {
  b.center = vec_from_json(j.at("center"));
  b.amplitude = j.at("amplitude").get<double>();
  b.width = j.at("width").get<double>();
}

void to_json(json& j, const BoostTerm& b) {
  j = json{{"center", vec_to_json(b.center)},
           {"strength", b.strength},
           {"width", b.width}};
}

void from_json(const json& j, BoostTerm& b) {
  b.center = vec_from_json(j.at("center"));
  b.strength = j.at("strength").get<double>();
  b.width = j.at("width").get<double>();
}

void to_json(json& j, const OracleField& f) {
  j = json{{"domain", f.domain},
           {"bumps", f.bumps},
           {"p_min", f.p_min},
           {"p_max", f.p_max},
           {"boosts", f.boosts}};
}

void from_json(const json& j, OracleField& f) {
  f.domain = j.at("domain").get<Domain>();
  f.bumps = j.at("bumps").get<std::vector<GaussianBump>>();
  f.p_min = j.value("p_min", 0.02);
  f.p_max = j.value("p_max", 0.99);
  f.boosts = j.value("boosts", std::vector<BoostTerm>{});
  if (!(f.p_min >= 0.0 && f.p_min < 1.0) || !(f.p_max > f.p_min) ||
      !(f.p_max <= 1.0))
    throw std::invalid_argument("field caps require 0 <= p_min < p_max <= 1");
}

void to_json(json& j, const StageSpec& s) {
  j = json{{"oracle", s.oracle},
           {"label", s.label},
           {"eval_noise", vec_to_json(s.eval_noise)}};
}

void from_json(const json& j, StageSpec& s) {
  s.oracle = j.at("oracle").get<OracleField>();
  s.label = j.value("label", 0);
  if (j.contains("eval_noise"))
    s.eval_noise = vec_from_json(j.at("eval_noise"));
  else
    s.eval_noise = Eigen::VectorXd::Zero(s.oracle.domain.dim());
  s.validate();
}

void to_json(json& j, const FinetuneConfig& c) {
  j = json{{"probe_count", c.probe_count},
           {"rollouts_per_probe", c.rollouts_per_probe},
           {"batch", c.batch},
           {"acquisition", c.acquisition},
           {"candidates", c.candidates},
           {"max_epochs", c.max_epochs},
           {"conv_window", c.conv_window},
           {"conv_tol", c.conv_tol},
           {"eta", c.eta},
           {"ell_ft", c.ell_ft},
           {"uniform_proposals", c.uniform_proposals},
           {"final_eval_trials", c.final_eval_trials}};
  if (c.kernel_params) j["kernel_params"] = *c.kernel_params;
}

void from_json(const json& j, FinetuneConfig& c) {
  c = FinetuneConfig{};
  c.probe_count = j.value("probe_count", c.probe_count);
  c.rollouts_per_probe = j.value("rollouts_per_probe", c.rollouts_per_probe);
  c.batch = j.value("batch", c.batch);
  if (j.contains("acquisition"))
    c.acquisition = j.at("acquisition").get<AcquisitionSpec>();
  c.candidates = j.value("candidates", c.candidates);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.conv_window = j.value("conv_window", c.conv_window);
  c.conv_tol = j.value("conv_tol", c.conv_tol);
  c.eta = j.value("eta", c.eta);
  c.ell_ft = j.value("ell_ft", c.ell_ft);
  c.uniform_proposals = j.value("uniform_proposals", c.uniform_proposals);
  c.final_eval_trials = j.value("final_eval_trials", c.final_eval_trials);
  if (j.contains("kernel_params"))
    c.kernel_params = j.at("kernel_params").get<KernelParams>();
  c.validate();
}

void to_json(json& j, const RunRecord& r) {
  j = json{{"strategy", r.strategy},
           {"stage_label", r.stage_label},
           {"epochs", r.epochs},
           {"epoch_rates", r.epoch_rates},
           {"final_rate", r.final_rate},
           {"seed", r.seed},
           {"stream", r.stream},
           {"config", r.config}};
}

void from_json(const json& j, RunRecord& r) {
  r.strategy = j.at("strategy").get<std::string>();
  r.stage_label = j.at("stage_label").get<int>();
  r.epochs = j.at("epochs").get<int>();
  r.epoch_rates = j.at("epoch_rates").get<std::vector<double>>();
  r.final_rate = j.at("final_rate").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.stream = j.at("stream").get<std::uint64_t>();
  r.config = j.at("config").get<FinetuneConfig>();
}

void to_json(json& j, const BenchmarkConfig& c) {
  j = json{{"finetune", c.finetune},
           {"seeds", c.seeds},
           {"gmm_rollouts", c.gmm_rollouts},
           {"gmm_k_max", c.gmm_k_max},
           {"deploy_draws", c.deploy_draws},
           {"eval_deployments", c.eval_deployments},
           {"chain_trials", c.chain_trials},
           {"threads", c.threads},
           {"verify_selections", c.verify_selections}};
}

void from_json(const json& j, BenchmarkConfig& c) {
  c = BenchmarkConfig{};
  if (j.contains("finetune")) c.finetune = j.at("finetune").get<FinetuneConfig>();
  c.seeds = j.value("seeds", c.seeds);
  c.gmm_rollouts = j.value("gmm_rollouts", c.gmm_rollouts);
  c.gmm_k_max = j.value("gmm_k_max", c.gmm_k_max);
  c.deploy_draws = j.value("deploy_draws", c.deploy_draws);
  c.eval_deployments = j.value("eval_deployments", c.eval_deployments);
  c.chain_trials = j.value("chain_trials", c.chain_trials);
  c.threads = j.value("threads", c.threads);
  c.verify_selections = j.value("verify_selections", c.verify_selections);
  c.validate();
}

json report_to_json(const BenchmarkReport& report) {
  json cells = json::array();
  for (const auto& cell : report.cells) {
    json stages = json::array();
    for (const auto& sd : cell.stages) {
      json s = json::object();
      for (int a = 0; a < kStrategyCount; ++a)
        s[to_string(static_cast<StrategyKind>(a))] = sd.rates[a];
      s["ft_epochs"] = sd.ft_epochs;
      s["ft_epoch_rates"] = sd.ft_epoch_rates;
      s["ft_final_rate"] = sd.ft_final_rate;
      s["gmm_base_missing"] = sd.gmm_base_missing;
      s["gmm_ft_missing"] = sd.gmm_ft_missing;
      s["selection_checks"] = sd.selection_checks;
      s["selection_violations"] = sd.selection_violations;
      stages.push_back(std::move(s));
    }
    json c{{"chain_id", cell.chain_id},
           {"seed", cell.seed},
           {"stages", stages},
           {"has_sequence", cell.has_sequence}};
    for (int a = 0; a < kStrategyCount; ++a) {
      const auto name = to_string(static_cast<StrategyKind>(a));
      c["chain_rates"][name] = cell.chain_rates[a];
      c["sequence_rates"][name] = cell.sequence_rates[a];
    }
    cells.push_back(std::move(c));
  }

  json summary = json::array();
  for (std::size_t c = 0; c < report.chain_summary.size(); ++c) {
    json row{{"landscape_id", c}};
    for (int a = 0; a < kStrategyCount; ++a) {
      const auto name = to_string(static_cast<StrategyKind>(a));
      row[name] = {{"mean", report.chain_summary[c][a].mean},
                   {"std", report.chain_summary[c][a].stddev}};
    }
    summary.push_back(std::move(row));
  }

  json means = json::object();
  for (int a = 0; a < kStrategyCount; ++a)
    means[to_string(static_cast<StrategyKind>(a))] = report.strategy_means[a];

  return json{{"cells", cells},
              {"summary", summary},
              {"strategy_means", means}};
}

std::string benchmark_csv(const BenchmarkReport& report) {
  std::string out = "landscape_id,baseline,deployment,finetune,refinery\n";
  for (std::size_t c = 0; c < report.chain_summary.size(); ++c) {
    out += std::to_string(c);
    for (int a = 0; a < kStrategyCount; ++a) {
      out += ',';
      out += format_mean_std(report.chain_summary[c][a]);
    }
    out += '\n';
  }
  return out;
}

std::string success_map_csv(const SuccessMap& map,
                            const std::vector<std::optional<double>>& slice) {
  char buf[64];
  std::string out = "dims," + std::to_string(map.dim_a) + "," +
                    std::to_string(map.dim_b) + "," +
                    std::to_string(map.res_a) + "," +
                    std::to_string(map.res_b) + "\n";
  out += "slice";
  for (const auto& v : slice) {
    out += ',';
    if (v.has_value()) {
      std::snprintf(buf, sizeof(buf), "%.17g", *v);
      out += buf;
    } else {
      out += "free";
    }
  }
  out += '\n';
  for (int ib = 0; ib < map.res_b; ++ib) {
    for (int ia = 0; ia < map.res_a; ++ia) {
      if (ia) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g",
                    map.values[static_cast<std::size_t>(ib) * map.res_a + ia]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

json provenance(std::uint64_t master_seed, const json& config) {
  const std::string dump = config.dump();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64,
                fnv1a64(dump.data(), dump.size()));
  return json{{"master_seed", master_seed},
              {"config_hash", hash},
              {"version", kVersion}};
}

}  // namespace refinery
