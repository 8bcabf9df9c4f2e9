#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "aqp/core.hpp"

namespace aqp {

class VerdictCache;
class VisitationTable;

struct EddyConfig {
  RoutingPolicyKind policy = RoutingPolicyKind::CostDriven;
  std::size_t warmup_batches = 1;
  double alpha = kDefaultCostAlpha;
  double prior = kDefaultSelectivityPrior;
  // Fixed visiting order; bypasses both the policy and the warmup phase.
  std::vector<PredicateId> static_order;
  // Stress mode: every churn_every dispatches the policy is redrawn at random.
  std::size_t churn_every = 0;
  std::uint64_t churn_seed = 0;
};

enum class Phase { Warming, Steady };

// What a worker saw while evaluating one batch.
struct Observation {
  PredicateId predicate_id = 0;
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  double elapsed_ms = 0.0;
  std::size_t cache_hits = 0;
};

enum class RouteAction { Dispatch, Retire, Recycle };

struct RoutingDecision {
  BatchId batch_id = 0;
  RouteAction action = RouteAction::Recycle;
  PredicateId predicate_id = 0;  // meaningful for Dispatch
  nlohmann::json reason;         // stat values behind the choice
};

// Ranking key of one predicate under a policy; lower runs first.
double policy_key(const RuntimeStats& stats, RoutingPolicyKind policy, double probe_hit_rate,
                  double prior = kDefaultSelectivityPrior);

// argmin of policy_key over the candidates, ties to the lowest id.
// hit_rates is indexed by predicate id; missing entries count as 0.
PredicateId choose_next(std::span<const PredicateId> unvisited, std::span<const RuntimeStats> stats,
                        RoutingPolicyKind policy, std::span<const double> hit_rates = {},
                        double prior = kDefaultSelectivityPrior);

// Routing brain of the central queue: decisions, warmup bookkeeping and
// statistics. Only the router activity touches it.
class EddyRouter {
 public:
  // caches[i] (may be null) is probed for predicate i under the reuse-aware policy.
  EddyRouter(std::vector<PredicateSpec> predicates, EddyConfig config,
             std::vector<const VerdictCache*> caches = {});

  // Pure: does not change any state.
  RoutingDecision decide(const RoutingBatch& batch, std::uint64_t visited) const;

  // Records that a Dispatch decision took effect.
  void commit(const RoutingDecision& decision);

  // Marks the predicate visited for the batch and folds the observation into
  // the statistics. Throws DuplicateReturn.
  void on_return(VisitationTable& vt, BatchId batch, const Observation& obs);

  Phase phase() const { return phase_; }
  RoutingPolicyKind policy() const { return policy_; }
  const std::vector<RuntimeStats>& stats() const { return stats_; }
  std::size_t predicate_count() const { return preds_.size(); }
  nlohmann::json stats_json() const;

 private:
  std::vector<PredicateSpec> preds_;
  EddyConfig cfg_;
  std::vector<const VerdictCache*> caches_;
  std::vector<RuntimeStats> stats_;
  std::vector<std::size_t> warm_dispatched_;
  std::vector<std::size_t> evaluations_;
  Phase phase_ = Phase::Warming;
  RoutingPolicyKind policy_;
  std::size_t dispatches_ = 0;
  std::mt19937_64 churn_rng_;
};

}  // namespace aqp
