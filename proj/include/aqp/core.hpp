#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace aqp {

using TupleId = std::uint64_t;
using BatchId = std::uint64_t;
using PredicateId = std::uint32_t;
using WorkerId = std::uint32_t;
using DeviceId = std::uint32_t;

// Attribute values carried by rows. Synthetic UDFs and simple filters read these.
using Scalar = std::variant<std::int64_t, double, std::string>;

std::string to_string(const Scalar& v);

struct TupleRow {
  TupleId tuple_id = 0;
  std::uint64_t payload_size = 0;  // abstract size units (text bytes, crop pixels)
  std::map<std::string, Scalar> attributes;

  friend bool operator==(const TupleRow&, const TupleRow&) = default;
};

struct RoutingBatch {
  BatchId batch_id = 0;
  std::vector<TupleRow> rows;
  double created_at = 0.0;
};

// Half-open tuple-id interval [begin, end).
struct TupleRange {
  TupleId begin = 0;
  TupleId end = 0;

  // Interval with both ends excluded, as in "id > lo AND id < hi".
  static TupleRange open(TupleId lo, TupleId hi) { return {lo + 1, hi > lo ? hi : lo + 1}; }

  bool contains(TupleId id) const { return id >= begin && id < end; }
  std::uint64_t size() const { return end > begin ? end - begin : 0; }
  friend bool operator==(const TupleRange&, const TupleRange&) = default;
};

enum class CostHeuristic { Constant, PayloadSize };

enum class RoutingPolicyKind { CostDriven, ScoreDriven, SelectivityDriven, ReuseAwareCostDriven };

std::string_view to_string(RoutingPolicyKind kind);
std::optional<RoutingPolicyKind> parse_policy(std::string_view name);

class Udf;

// A UDF-backed predicate inside the AQP stage.
struct PredicateSpec {
  PredicateId predicate_id = 0;
  std::string name;
  std::shared_ptr<const Udf> udf;
  std::string pool = "cpu";  // device pool serving this predicate
  bool cacheable = false;
  CostHeuristic cost_heuristic = CostHeuristic::Constant;
  double worker_memory = 0.0;            // per-worker footprint; 0 means not memory bound
  std::optional<std::size_t> max_workers;  // unset: memory bound decides (or 1 if unbounded)
};

struct RuntimeStats {
  double smoothed_cost_ms = 0.0;
  bool has_cost = false;
  std::uint64_t tuples_in = 0;
  std::uint64_t tuples_passed = 0;
  double cache_hit_rate = 0.0;
  bool warmup_done = false;
};

inline constexpr double kDefaultSelectivityPrior = 0.5;
inline constexpr double kDefaultCostAlpha = 0.2;

// Count-based pass ratio; the prior when nothing has been observed yet.
double selectivity(const RuntimeStats& stats, double prior = kDefaultSelectivityPrior);

// cost / (1 - selectivity); +inf when the predicate filters nothing.
double score(double cost_ms, double selectivity);

// (1 - hit_rate) * cost.
double estimated_cost(double cost_ms, double cache_hit_rate);

// Exponential smoothing of the per-tuple cost. The first observation is taken as is.
RuntimeStats update_cost(RuntimeStats stats, double observed_ms_per_tuple, double alpha);

}  // namespace aqp
