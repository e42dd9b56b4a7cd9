#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "refinery/engine.hpp"

namespace refinery {

using nlohmann::json;

void to_json(json& j, const Domain& d);
void from_json(const json& j, Domain& d);

void to_json(json& j, const EvalRecord& r);
void from_json(const json& j, EvalRecord& r);

void to_json(json& j, const EvalDataset& ds);
void from_json(const json& j, EvalDataset& ds);

void to_json(json& j, const KernelParams& p);
void from_json(const json& j, KernelParams& p);

void to_json(json& j, const AcquisitionSpec& s);
void from_json(const json& j, AcquisitionSpec& s);

/// GP models serialize their hyperparameters, prior mean, and training
/// arrays; the factorization is recomputed on load.
json gp_to_json(const GPModel& m);
GPModel gp_from_json(const json& j);

void to_json(json& j, const GMMModel& m);
void from_json(const json& j, GMMModel& m);

void to_json(json& j, const GaussianBump& b);
void from_json(const json& j, GaussianBump& b);

void to_json(json& j, const BoostTerm& b);
void from_json(const json& j, BoostTerm& b);

void to_json(json& j, const OracleField& f);
void from_json(const json& j, OracleField& f);

void to_json(json& j, const StageSpec& s);
void from_json(const json& j, StageSpec& s);

void to_json(json& j, const FinetuneConfig& c);
void from_json(const json& j, FinetuneConfig& c);

void to_json(json& j, const RunRecord& r);
void from_json(const json& j, RunRecord& r);

void to_json(json& j, const BenchmarkConfig& c);
void from_json(const json& j, BenchmarkConfig& c);

json report_to_json(const BenchmarkReport& report);

/// Summary table, one row per landscape:
/// landscape_id,baseline,deployment,finetune,refinery with mean±std cells.
std::string benchmark_csv(const BenchmarkReport& report);

/// Success map as CSV with a two-line header: the free dimensions and grid
/// resolution, then the slice values ("free" marks the plotted dimensions).
std::string success_map_csv(const SuccessMap& map,
                            const std::vector<std::optional<double>>& slice);

/// Provenance block stamped into every output document: master seed, an
/// FNV-1a hash of the canonical config dump, and the tool version.
json provenance(std::uint64_t master_seed, const json& config);

}  // namespace refinery
