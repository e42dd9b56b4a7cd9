#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "refinery/acquisition.hpp"
#include "refinery/gmm.hpp"
#include "refinery/gp.hpp"
#include "refinery/oracle.hpp"

namespace refinery {

/// Knobs for one fine-tuning run (one stage, one seed).
struct FinetuneConfig {
  int probe_count = 64;         // probe locations per epoch
  int rollouts_per_probe = 20;  // rollouts aggregated at each probe
  int batch = 8;                // proposals applied per epoch
  AcquisitionSpec acquisition;
  int candidates = 4096;      // acquisition scan size
  int max_epochs = 60;
  int conv_window = 5;        // epochs
  double conv_tol = 0.05;     // absolute spread
  double eta = 0.3;           // oracle improvement gain
  double ell_ft = 0.12;       // oracle improvement width (domain units)
  bool uniform_proposals = false;  // ablation: skip the GP, propose uniformly
  std::optional<KernelParams> kernel_params;  // fixed hyperparameters; else auto
  int final_eval_trials = 1000;

  void validate() const;
};

enum class StrategyKind { kBaseline, kDeployment, kFinetune, kRefinery };
constexpr int kStrategyCount = 4;
std::string to_string(StrategyKind s);
StrategyKind strategy_from_string(const std::string& name);

/// Everything recorded about one fine-tuning run.
struct RunRecord {
  std::string strategy;
  int stage_label = 0;
  int epochs = 0;
  std::vector<double> epoch_rates;  // pooled evaluation rate per epoch
  double final_rate = 0.0;          // uniform deployments after the run
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  FinetuneConfig config;
};

/// One stage of a chain with its deployment strategy and artifacts. For the
/// Finetune/Refinery strategies `stage` is the fine-tuned stage; the GMM is
/// present for the Deployment/Refinery strategies.
struct StageDeployment {
  StageSpec stage;
  StrategyKind strategy = StrategyKind::kBaseline;
  std::optional<GMMModel> gmm;
};

struct ChainSpec {
  std::vector<StageDeployment> stages;
};

/// probe_count uniform probes x rollouts_per_probe rollouts each.
std::pair<EvalDataset, double> evaluate_policy(const StageSpec& s,
                                               const FinetuneConfig& cfg,
                                               RngStream rng);

/// True iff the history holds at least `window` epochs and the last window's
/// max-min spread is below `tol` (absolute).
bool converged(const std::vector<double>& history, int window = 5,
               double tol = 0.05);

/// The fine-tuning loop: evaluate, fit the surrogate, propose a batch, apply
/// the improvement, until the rate history converges or max_epochs is hit.
/// The surrogate is refit from scratch on each epoch's fresh evaluation.
std::pair<StageSpec, RunRecord> finetune_stage(const StageSpec& s,
                                               const FinetuneConfig& cfg,
                                               RngStream rng);

struct DeployOutcome {
  InitState chosen;
  bool success = false;
};

/// One deployment: Baseline/Finetune draw theta uniformly, the GMM arms take
/// the density-argmax over `gmm_draws` samples; success is a single rollout.
DeployOutcome deploy(const StageSpec& s, StrategyKind strategy,
                     const GMMModel* gmm, RngStream rng, int gmm_draws = 1000);

struct ChainResult {
  double sequence_rate = 0.0;
  std::vector<double> per_stage_rates;  // conditioned on reaching the stage
};

/// Executes the stages in order per trial, aborting at the first failed
/// stage; `retry_budget` stage re-attempts are allowed per trial.
ChainResult run_chain(const ChainSpec& c, int trials, RngStream rng,
                      int retry_budget = 0);

/// Offline phase of the deployment-time optimizer: N uniform single-rollout
/// probes, then a BIC-selected mixture over the successful initializations.
/// Returns nothing when no rollout succeeded (callers fall back to uniform
/// deployment).
std::optional<GMMModel> fit_success_gmm(const StageSpec& s, int n_rollouts,
                                        int k_max, RngStream rng);

struct BenchmarkConfig {
  FinetuneConfig finetune;
  int seeds = 5;
  int gmm_rollouts = 1000;     // offline rollouts per GMM fit
  int gmm_k_max = 8;
  int deploy_draws = 1000;     // GMM candidates per deployment
  int eval_deployments = 1000; // deployments per strategy evaluation
  int chain_trials = 1000;     // sequence trials for multi-stage chains
  int threads = 1;
  bool verify_selections = false;  // exhaustive-scan audit of every GMM pick

  void validate() const;
};

struct StageCellData {
  std::array<double, kStrategyCount> rates{};  // deployment success rates
  int ft_epochs = 0;
  std::vector<double> ft_epoch_rates;
  double ft_final_rate = 0.0;
  bool gmm_base_missing = false;
  bool gmm_ft_missing = false;
  std::int64_t selection_checks = 0;
  std::int64_t selection_violations = 0;
};

struct BenchmarkCell {
  int chain_id = 0;
  int seed = 0;
  std::vector<StageCellData> stages;
  // Chain-level metric (mean of stage rates; single-stage chains just carry
  // the stage rate) and, for multi-stage chains, full-sequence rates.
  std::array<double, kStrategyCount> chain_rates{};
  std::array<double, kStrategyCount> sequence_rates{};
  bool has_sequence = false;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample std across seeds
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;  // chain-major, then seed
  std::vector<std::array<MeanStd, kStrategyCount>> chain_summary;
  std::array<double, kStrategyCount> strategy_means{};  // over chains
};

/// The four-way strategy comparison over a suite of landscape chains: per
/// (chain, seed), fine-tune each stage, fit the two GMMs, evaluate
/// eval_deployments deployments per strategy, then aggregate across seeds.
/// Cells run in parallel up to cfg.threads; outputs are independent of the
/// thread count.
BenchmarkReport run_benchmark(const std::vector<std::vector<StageSpec>>& suite,
                              const BenchmarkConfig& cfg, RngStream rng);

/// The default desk-scale suite: `count` single-stage landscapes on the unit
/// square, seeded from rng, with 2% evaluation noise per dimension.
std::vector<std::vector<StageSpec>> default_suite(int count, RngStream rng);

}  // namespace refinery
