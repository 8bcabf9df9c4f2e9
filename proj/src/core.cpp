#include "aqp/core.hpp"

#include <limits>
#include <sstream>

namespace aqp {

std::string to_string(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    std::ostringstream os;
    os << *d;
    return os.str();
  }
  return std::get<std::string>(v);
}

std::string_view to_string(RoutingPolicyKind kind) {
  switch (kind) {
    case RoutingPolicyKind::CostDriven:
      return "cost";
    case RoutingPolicyKind::ScoreDriven:
      return "score";
    case RoutingPolicyKind::SelectivityDriven:
      return "selectivity";
    case RoutingPolicyKind::ReuseAwareCostDriven:
      return "reuse-aware";
  }
  return "cost";
}

std::optional<RoutingPolicyKind> parse_policy(std::string_view name) {
  if (name == "cost") return RoutingPolicyKind::CostDriven;
  if (name == "score") return RoutingPolicyKind::ScoreDriven;
  if (name == "selectivity") return RoutingPolicyKind::SelectivityDriven;
  if (name == "reuse-aware") return RoutingPolicyKind::ReuseAwareCostDriven;
  return std::nullopt;
}

double selectivity(const RuntimeStats& stats, double prior) {
  if (stats.tuples_in == 0) return prior;
  return static_cast<double>(stats.tuples_passed) / static_cast<double>(stats.tuples_in);
}

double score(double cost_ms, double sel) {
  if (sel >= 1.0) return std::numeric_limits<double>::infinity();
  return cost_ms / (1.0 - sel);
}

double estimated_cost(double cost_ms, double cache_hit_rate) {
  return (1.0 - cache_hit_rate) * cost_ms;
}

RuntimeStats update_cost(RuntimeStats stats, double observed_ms_per_tuple, double alpha) {
  if (!stats.has_cost) {
    stats.smoothed_cost_ms = observed_ms_per_tuple;
    stats.has_cost = true;
  } else {
    stats.smoothed_cost_ms = alpha * observed_ms_per_tuple + (1.0 - alpha) * stats.smoothed_cost_ms;
  }
  return stats;
}

}  // namespace aqp
