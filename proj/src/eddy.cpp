#include "aqp/eddy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"
#include "aqp/pipeline.hpp"

namespace aqp {

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

double policy_key(const RuntimeStats& stats, RoutingPolicyKind policy, double probe_hit_rate,
                  double prior) {
  const double cost = stats.has_cost ? stats.smoothed_cost_ms : 0.0;
  switch (policy) {
    case RoutingPolicyKind::CostDriven:
      return cost;
    case RoutingPolicyKind::ScoreDriven:
      return score(cost, selectivity(stats, prior));
    case RoutingPolicyKind::SelectivityDriven:
      return selectivity(stats, prior);
    case RoutingPolicyKind::ReuseAwareCostDriven:
      return estimated_cost(cost, probe_hit_rate);
  }
  return cost;
}

PredicateId choose_next(std::span<const PredicateId> unvisited, std::span<const RuntimeStats> stats,
                        RoutingPolicyKind policy, std::span<const double> hit_rates, double prior) {
  if (unvisited.empty()) throw Error("choose_next: no unvisited predicate");
  PredicateId best = unvisited.front();
  double best_key = std::numeric_limits<double>::infinity();
  bool have = false;
  for (PredicateId p : unvisited) {
    const double hit = p < hit_rates.size() ? hit_rates[p] : 0.0;
    const double key = policy_key(stats[p], policy, hit, prior);
    if (!have || key < best_key || (key == best_key && p < best)) {
      best = p;
      best_key = key;
      have = true;
    }
  }
  return best;
}

EddyRouter::EddyRouter(std::vector<PredicateSpec> predicates, EddyConfig config,
                       std::vector<const VerdictCache*> caches)
    : preds_(std::move(predicates)),
      cfg_(std::move(config)),
      caches_(std::move(caches)),
      stats_(preds_.size()),
      warm_dispatched_(preds_.size(), 0),
      evaluations_(preds_.size(), 0),
      policy_(cfg_.policy),
      churn_rng_(cfg_.churn_seed) {
  if (preds_.size() > 64) throw Error("at most 64 predicates per AQP stage");
  if (cfg_.warmup_batches == 0) throw Error("warmup_batches must be >= 1");
  caches_.resize(preds_.size(), nullptr);
  for (PredicateId p : cfg_.static_order) {
    if (p >= preds_.size()) throw Error("static order names unknown predicate " + std::to_string(p));
  }
  if (!cfg_.static_order.empty() || preds_.empty()) phase_ = Phase::Steady;
}

nlohmann::json EddyRouter::stats_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < stats_.size(); ++i) {
    const auto& s = stats_[i];
    arr.push_back({{"predicate_id", i},
                   {"cost", s.has_cost ? nlohmann::json(s.smoothed_cost_ms) : nlohmann::json(nullptr)},
                   {"selectivity", selectivity(s, cfg_.prior)},
                   {"tuples_in", s.tuples_in},
                   {"tuples_passed", s.tuples_passed},
                   {"hit_rate", s.cache_hit_rate}});
  }
  return arr;
}

RoutingDecision EddyRouter::decide(const RoutingBatch& batch, std::uint64_t visited) const {
  RoutingDecision d;
  d.batch_id = batch.batch_id;
  std::vector<PredicateId> unvisited;
  for (PredicateId p = 0; p < preds_.size(); ++p) {
    if (!(visited & (std::uint64_t{1} << p))) unvisited.push_back(p);
  }
  if (unvisited.empty()) {
    d.action = RouteAction::Retire;
    return d;
  }
  d.reason["first"] = visited == 0;

  if (!cfg_.static_order.empty()) {
    for (PredicateId p : cfg_.static_order) {
      if (!(visited & (std::uint64_t{1} << p))) {
        d.action = RouteAction::Dispatch;
        d.predicate_id = p;
        d.reason["phase"] = "static";
        return d;
      }
    }
    // Predicates missing from the static order run last in id order.
    d.action = RouteAction::Dispatch;
    d.predicate_id = unvisited.front();
    d.reason["phase"] = "static";
    return d;
  }

  if (phase_ == Phase::Warming) {
    d.reason["phase"] = "warming";
    for (PredicateId p : unvisited) {
      if (warm_dispatched_[p] < cfg_.warmup_batches) {
        d.action = RouteAction::Dispatch;
        d.predicate_id = p;
        return d;
      }
    }
    d.action = RouteAction::Recycle;
    return d;
  }

  std::vector<double> hits(preds_.size(), 0.0);
  if (policy_ == RoutingPolicyKind::ReuseAwareCostDriven) {
    for (PredicateId p : unvisited) {
      if (caches_[p] != nullptr) hits[p] = caches_[p]->probe_hit_rate(batch, preds_[p].udf->name());
    }
  }
  d.action = RouteAction::Dispatch;
  d.predicate_id = choose_next(unvisited, stats_, policy_, hits, cfg_.prior);
  nlohmann::json keys = nlohmann::json::object();
  for (PredicateId p : unvisited) {
    keys[std::to_string(p)] = finite_or_null(policy_key(stats_[p], policy_, hits[p], cfg_.prior));
  }
  d.reason["phase"] = "steady";
  d.reason["policy"] = std::string(to_string(policy_));
  d.reason["keys"] = std::move(keys);
  if (policy_ == RoutingPolicyKind::ReuseAwareCostDriven) {
    nlohmann::json probes = nlohmann::json::object();
    for (PredicateId p : unvisited) probes[std::to_string(p)] = hits[p];
    d.reason["probe"] = std::move(probes);
  }
  return d;
}

void EddyRouter::commit(const RoutingDecision& decision) {
  if (decision.action != RouteAction::Dispatch) return;
  if (phase_ == Phase::Warming) ++warm_dispatched_[decision.predicate_id];
  ++dispatches_;
  if (cfg_.churn_every > 0 && dispatches_ % cfg_.churn_every == 0) {
    std::uniform_int_distribution<int> pick(0, 3);
    policy_ = static_cast<RoutingPolicyKind>(pick(churn_rng_));
  }
}

void EddyRouter::on_return(VisitationTable& vt, BatchId batch, const Observation& obs) {
  if (obs.predicate_id >= preds_.size()) throw Error("return from unknown predicate");
  vt.mark(batch, obs.predicate_id);
  auto& s = stats_[obs.predicate_id];
  s.tuples_in += obs.rows_in;
  s.tuples_passed += obs.rows_out;
  const std::size_t computed = obs.rows_in - std::min(obs.cache_hits, obs.rows_in);
  if (computed > 0) s = update_cost(s, obs.elapsed_ms / static_cast<double>(computed), cfg_.alpha);
  if (preds_[obs.predicate_id].cacheable && obs.rows_in > 0) {
    s.cache_hit_rate = static_cast<double>(obs.cache_hits) / static_cast<double>(obs.rows_in);
  }
  ++evaluations_[obs.predicate_id];
  if (evaluations_[obs.predicate_id] >= cfg_.warmup_batches) s.warmup_done = true;
  if (phase_ == Phase::Warming) {
    bool all = true;
    for (const auto& st : stats_) all = all && st.warmup_done;
    if (all) phase_ = Phase::Steady;
  }
}

}  // namespace aqp
