#pragma once

#include <string>
#include <vector>

#include "refinery/gp.hpp"

namespace refinery {

enum class AcquisitionKind { kUcb, kPi, kEi };

AcquisitionKind acquisition_kind_from_string(const std::string& name);
std::string to_string(AcquisitionKind kind);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::kUcb;
  double beta = 2.0;  // UCB exploration weight
};

/// Points selected for the next fine-tuning epoch, with their acquisition
/// values at selection time.
struct ProposalBatch {
  std::vector<InitState> points;
  std::vector<double> scores;
};

/// Standard normal CDF/PDF; clamped outside |z| = 8 where the tails are
/// below double precision anyway.
double normal_cdf(double z);
double normal_pdf(double z);

/// mean + beta * std.
double ucb(double mean, double std, double beta);

/// Phi((mean - incumbent)/std); 1 or 0 at std = 0 depending on the sign.
double pi(double mean, double std, double incumbent);

/// (mean - incumbent) Phi(Z) + std phi(Z); max(mean - incumbent, 0) at
/// std = 0.
double ei(double mean, double std, double incumbent);

double acquisition_score(const AcquisitionSpec& spec, double mean, double std,
                         double incumbent);

/// Greedy batch maximization of the acquisition over a candidate set of
/// `candidates` uniform draws followed by the training inputs. After each
/// pick a constant-liar pseudo-observation at the incumbent rate is inserted
/// and the posterior refit, so batch points stay apart. Ties break toward
/// the lowest candidate index; picked candidates leave the pool. The
/// incumbent is the best observed empirical rate in the model.
ProposalBatch propose(const GPModel& m, const AcquisitionSpec& spec,
                      const Domain& domain, int batch, int candidates,
                      RngStream rng);

}  // namespace refinery
