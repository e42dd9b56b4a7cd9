#include "refinery/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace refinery {

namespace {

// Fixed substream keys so every consumer of a cell's stream stays disjoint.
enum : std::uint64_t {
  kKeyEval = 1,
  kKeyHyper = 2,
  kKeyPropose = 3,
  kKeyFinalEval = 4,
  kKeyFinetune = 11,
  kKeyGmmBase = 12,
  kKeyGmmTuned = 13,
  kKeyDeployEval = 14,
  kKeySequence = 15,
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd ms;
  ms.mean = mean_of(v);
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - ms.mean) * (x - ms.mean);
    ms.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return ms;
}

}  // namespace

void FinetuneConfig::validate() const {
  if (probe_count < 1 || rollouts_per_probe < 1)
    throw std::invalid_argument("probe_count and rollouts_per_probe must be >= 1");
  if (static_cast<long>(probe_count) * rollouts_per_probe < 100)
    throw std::invalid_argument("probe_count * rollouts_per_probe must be >= 100");
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (candidates < batch)
    throw std::invalid_argument("candidates must be >= batch");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (conv_window < 2) throw std::invalid_argument("conv_window must be >= 2");
  if (!(conv_tol > 0.0)) throw std::invalid_argument("conv_tol must be > 0");
  if (!(eta > 0.0) || !(eta <= 1.0))
    throw std::invalid_argument("eta must be in (0, 1]");
  if (!(ell_ft > 0.0)) throw std::invalid_argument("ell_ft must be > 0");
  if (final_eval_trials < 1)
    throw std::invalid_argument("final_eval_trials must be >= 1");
}

std::string to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::kBaseline: return "baseline";
    case StrategyKind::kDeployment: return "deployment";
    case StrategyKind::kFinetune: return "finetune";
    case StrategyKind::kRefinery: return "refinery";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
  if (name == "baseline") return StrategyKind::kBaseline;
  if (name == "deployment") return StrategyKind::kDeployment;
  if (name == "finetune") return StrategyKind::kFinetune;
  if (name == "refinery") return StrategyKind::kRefinery;
  throw std::invalid_argument("unknown strategy: \"" + name + "\"");
}

std::pair<EvalDataset, double> evaluate_policy(const StageSpec& s,
                                               const FinetuneConfig& cfg,
                                               RngStream rng) {
  cfg.validate();
  const auto probes =
      uniform_sample(s.oracle.domain, cfg.probe_count, rng.substream(0));
  EvalDataset ds;
  ds.domain = s.oracle.domain;
  ds.records.reserve(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i)
    ds.records.push_back(
        rollout(s, probes[i], cfg.rollouts_per_probe, rng.substream(i + 1)));
  const double rate = success_rate(ds);
  return {std::move(ds), rate};
}

bool converged(const std::vector<double>& history, int window, double tol) {
  if (static_cast<int>(history.size()) < window) return false;
  double lo = history.back(), hi = history.back();
  for (int i = 0; i < window; ++i) {
    const double v = history[history.size() - 1 - i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return (hi - lo) < tol;
}

std::pair<StageSpec, RunRecord> finetune_stage(const StageSpec& s,
                                               const FinetuneConfig& cfg,
                                               RngStream rng) {
  cfg.validate();
  s.validate();
  const Domain& domain = s.oracle.domain;

  StageSpec cur = s;
  RunRecord rec;
  rec.strategy = "finetune";
  rec.stage_label = s.label;
  rec.seed = rng.seed();
  rec.stream = rng.stream_id();
  rec.config = cfg;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    RngStream er = rng.substream(epoch);
    auto [ds, rate] = evaluate_policy(cur, cfg, er.substream(kKeyEval));
    rec.epoch_rates.push_back(rate);
    if (converged(rec.epoch_rates, cfg.conv_window, cfg.conv_tol)) break;

    ProposalBatch batch;
    if (cfg.uniform_proposals) {
      batch.points =
          uniform_sample(domain, cfg.batch, er.substream(kKeyPropose));
      batch.scores.assign(batch.points.size(), 0.0);
    } else {
      GPModel gp = cfg.kernel_params
                       ? fit(ds, *cfg.kernel_params)
                       : fit_auto(ds, er.substream(kKeyHyper));
      batch = propose(gp, cfg.acquisition, domain, cfg.batch, cfg.candidates,
                      er.substream(kKeyPropose));
    }
    cur.oracle = finetune_update(cur.oracle, batch, cfg.eta, cfg.ell_ft);
  }
  rec.epochs = static_cast<int>(rec.epoch_rates.size());

  // Deployment-style final evaluation: uniform initializations, one rollout
  // apiece.
  RngStream fr = rng.substream(kKeyFinalEval + 1000000);
  const auto thetas =
      uniform_sample(domain, cfg.final_eval_trials, fr.substream(0));
  std::int64_t succ = 0;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    succ += rollout(cur, thetas[i], 1, fr.substream(i + 1)).successes;
  rec.final_rate =
      static_cast<double>(succ) / static_cast<double>(cfg.final_eval_trials);
  return {std::move(cur), std::move(rec)};
}

DeployOutcome deploy(const StageSpec& s, StrategyKind strategy,
                     const GMMModel* gmm, RngStream rng, int gmm_draws) {
  const bool wants_gmm = strategy == StrategyKind::kDeployment ||
                         strategy == StrategyKind::kRefinery;
  if (wants_gmm && gmm == nullptr)
    throw std::invalid_argument("strategy \"" + to_string(strategy) +
                                "\" requires a fitted GMM");
  DeployOutcome out;
  out.chosen =
      wants_gmm
          ? deploy_select(*gmm, gmm_draws, s.oracle.domain, rng.substream(0))
          : uniform_sample(s.oracle.domain, 1, rng.substream(0)).front();
  out.success = rollout(s, out.chosen, 1, rng.substream(1)).successes > 0;
  return out;
}

ChainResult run_chain(const ChainSpec& c, int trials, RngStream rng,
                      int retry_budget) {
  if (c.stages.empty()) throw std::invalid_argument("chain has no stages");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (retry_budget < 0) throw std::invalid_argument("retry_budget must be >= 0");

  const int n_stages = static_cast<int>(c.stages.size());
  std::vector<std::int64_t> reached(n_stages, 0), passed(n_stages, 0);
  std::int64_t sequences_ok = 0;

  for (int t = 0; t < trials; ++t) {
    RngStream tr = rng.substream(t);
    int retries_left = retry_budget;
    bool alive = true;
    for (int i = 0; i < n_stages && alive; ++i) {
      ++reached[i];
      RngStream sr = tr.substream(i);
      const auto& sd = c.stages[i];
      const GMMModel* gmm = sd.gmm ? &*sd.gmm : nullptr;
      bool ok = false;
      for (int attempt = 0;; ++attempt) {
        ok = deploy(sd.stage, sd.strategy, gmm, sr.substream(attempt)).success;
        if (ok || retries_left == 0) break;
        --retries_left;
      }
      if (ok)
        ++passed[i];
      else
        alive = false;
    }
    if (alive) ++sequences_ok;
  }

  ChainResult res;
  res.sequence_rate =
      static_cast<double>(sequences_ok) / static_cast<double>(trials);
  for (int i = 0; i < n_stages; ++i)
    res.per_stage_rates.push_back(
        reached[i] > 0
            ? static_cast<double>(passed[i]) / static_cast<double>(reached[i])
            : 0.0);
  return res;
}

std::optional<GMMModel> fit_success_gmm(const StageSpec& s, int n_rollouts,
                                        int k_max, RngStream rng) {
  if (n_rollouts < 1)
    throw std::invalid_argument("n_rollouts must be >= 1");
  const auto poses =
      uniform_sample(s.oracle.domain, n_rollouts, rng.substream(0));
  std::vector<InitState> succ;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    // Per-rollout records stay unaggregated: one pose, one trial.
    if (rollout(s, poses[i], 1, rng.substream(i + 1)).successes > 0)
      succ.push_back(poses[i]);
  }
  if (succ.empty()) return std::nullopt;
  RngStream fit_rng = rng.substream(static_cast<std::uint64_t>(n_rollouts) + 1);
  if (succ.size() < 2) return fit_em(succ, 1, fit_rng).model;
  return select_k(succ, k_max, fit_rng);
}

void BenchmarkConfig::validate() const {
  finetune.validate();
  if (seeds < 2) throw std::invalid_argument("benchmark needs >= 2 seeds");
  if (gmm_rollouts < 1 || deploy_draws < 1 || eval_deployments < 1 ||
      chain_trials < 1 || gmm_k_max < 1)
    throw std::invalid_argument("benchmark counts must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

namespace {

BenchmarkCell run_cell(const std::vector<StageSpec>& chain, int chain_id,
                       int seed, const BenchmarkConfig& cfg, RngStream cell) {
  BenchmarkCell out;
  out.chain_id = chain_id;
  out.seed = seed;

  // Per-stage artifacts, shared by the strategy arms.
  std::vector<StageSpec> tuned;
  std::vector<std::optional<GMMModel>> gmm_base, gmm_tuned;
  for (std::size_t si = 0; si < chain.size(); ++si) {
    RngStream sr = cell.substream(100 + si);
    StageCellData data;

    auto [ft_stage, rec] =
        finetune_stage(chain[si], cfg.finetune, sr.substream(kKeyFinetune));
    data.ft_epochs = rec.epochs;
    data.ft_epoch_rates = rec.epoch_rates;
    data.ft_final_rate = rec.final_rate;

    auto gb = fit_success_gmm(chain[si], cfg.gmm_rollouts, cfg.gmm_k_max,
                              sr.substream(kKeyGmmBase));
    auto gt = fit_success_gmm(ft_stage, cfg.gmm_rollouts, cfg.gmm_k_max,
                              sr.substream(kKeyGmmTuned));
    data.gmm_base_missing = !gb.has_value();
    data.gmm_ft_missing = !gt.has_value();

    // Evaluate the four arms at this stage.
    for (int a = 0; a < kStrategyCount; ++a) {
      const auto strategy = static_cast<StrategyKind>(a);
      const bool tuned_arm = strategy == StrategyKind::kFinetune ||
                             strategy == StrategyKind::kRefinery;
      const bool gmm_arm = strategy == StrategyKind::kDeployment ||
                           strategy == StrategyKind::kRefinery;
      const StageSpec& stage = tuned_arm ? ft_stage : chain[si];
      const std::optional<GMMModel>& gmm = tuned_arm ? gt : gb;
      RngStream ar = sr.substream(kKeyDeployEval).substream(a);

      std::int64_t succ = 0;
      for (int e = 0; e < cfg.eval_deployments; ++e) {
        RngStream dr = ar.substream(e);
        if (gmm_arm && gmm.has_value()) {
          if (cfg.verify_selections) {
            std::vector<InitState> accepted;
            auto sel = deploy_select_detailed(*gmm, cfg.deploy_draws,
                                              stage.oracle.domain,
                                              dr.substream(0), &accepted);
            for (const auto& c : accepted) {
              ++data.selection_checks;
              if (density(*gmm, c) > sel.density) ++data.selection_violations;
            }
            succ += rollout(stage, sel.point, 1, dr.substream(1)).successes;
          } else {
            succ += deploy(stage, strategy, &*gmm, dr, cfg.deploy_draws).success
                        ? 1
                        : 0;
          }
        } else {
          // GMM arms without a mixture (zero successes) fall back to uniform.
          succ += deploy(stage, StrategyKind::kBaseline, nullptr, dr).success
                      ? 1
                      : 0;
        }
      }
      data.rates[a] = static_cast<double>(succ) /
                      static_cast<double>(cfg.eval_deployments);
    }

    tuned.push_back(std::move(ft_stage));
    gmm_base.push_back(std::move(gb));
    gmm_tuned.push_back(std::move(gt));
    out.stages.push_back(std::move(data));
  }

  for (int a = 0; a < kStrategyCount; ++a) {
    std::vector<double> stage_rates;
    for (const auto& sd : out.stages) stage_rates.push_back(sd.rates[a]);
    out.chain_rates[a] = mean_of(stage_rates);
  }

  if (chain.size() >= 2) {
    out.has_sequence = true;
    for (int a = 0; a < kStrategyCount; ++a) {
      const auto strategy = static_cast<StrategyKind>(a);
      const bool tuned_arm = strategy == StrategyKind::kFinetune ||
                             strategy == StrategyKind::kRefinery;
      ChainSpec spec;
      for (std::size_t si = 0; si < chain.size(); ++si) {
        StageDeployment sd;
        sd.stage = tuned_arm ? tuned[si] : chain[si];
        const auto& gmm = tuned_arm ? gmm_tuned[si] : gmm_base[si];
        const bool gmm_arm = strategy == StrategyKind::kDeployment ||
                             strategy == StrategyKind::kRefinery;
        sd.strategy = (gmm_arm && gmm.has_value()) ? strategy
                      : tuned_arm ? StrategyKind::kFinetune
                                  : StrategyKind::kBaseline;
        if (gmm_arm && gmm.has_value()) sd.gmm = gmm;
        spec.stages.push_back(std::move(sd));
      }
      out.sequence_rates[a] =
          run_chain(spec, cfg.chain_trials, cell.substream(kKeySequence + a))
              .sequence_rate;
    }
  } else {
    out.sequence_rates = out.chain_rates;
  }
  return out;
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<std::vector<StageSpec>>& suite,
                              const BenchmarkConfig& cfg, RngStream rng) {
  cfg.validate();
  if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
  for (const auto& chain : suite)
    if (chain.empty()) throw std::invalid_argument("suite chain has no stages");

  struct Job {
    int chain_id;
    int seed;
  };
  std::vector<Job> jobs;
  for (int c = 0; c < static_cast<int>(suite.size()); ++c)
    for (int s = 0; s < cfg.seeds; ++s) jobs.push_back({c, s});

  BenchmarkReport report;
  report.cells.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      // Cell streams depend only on (chain, seed), never on scheduling.
      RngStream cell =
          rng.substream(job.chain_id + 1).substream(job.seed + 1);
      report.cells[j] =
          run_cell(suite[job.chain_id], job.chain_id, job.seed, cfg, cell);
    }
  };
  const int n_threads =
      std::min<int>(cfg.threads, static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregate across seeds per chain, then across chains.
  report.chain_summary.resize(suite.size());
  for (int c = 0; c < static_cast<int>(suite.size()); ++c) {
    for (int a = 0; a < kStrategyCount; ++a) {
      std::vector<double> vals;
      for (const auto& cell : report.cells)
        if (cell.chain_id == c) vals.push_back(cell.chain_rates[a]);
      report.chain_summary[c][a] = mean_std(vals);
    }
  }
  for (int a = 0; a < kStrategyCount; ++a) {
    std::vector<double> means;
    for (const auto& cs : report.chain_summary) means.push_back(cs[a].mean);
    report.strategy_means[a] = mean_of(means);
  }
  return report;
}

std::vector<std::vector<StageSpec>> default_suite(int count, RngStream rng) {
  if (count < 1) throw std::invalid_argument("suite count must be >= 1");
  const Domain domain = Domain::unit(2);
  std::vector<std::vector<StageSpec>> suite;
  for (int i = 0; i < count; ++i) {
    StageSpec stage;
    stage.oracle = make_landscape(domain, rng.substream(i));
    stage.label = 0;
    stage.eval_noise = Eigen::VectorXd::Constant(2, 0.02);
    suite.push_back({std::move(stage)});
  }
  return suite;
}

}  // namespace refinery
