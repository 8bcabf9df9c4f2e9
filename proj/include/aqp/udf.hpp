#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "aqp/core.hpp"
#include "aqp/querylang.hpp"

namespace aqp {

class VerdictCache;

struct RowOutcome {
  bool pass = false;
  double cost_ms = 0.0;  // compute cost on a speed-1.0 device
};

// Single-row evaluation entry point. Third-party UDFs that only expose
// one-item inference plug in here. evaluate_row must depend only on the row.
class Udf {
 public:
  virtual ~Udf() = default;
  virtual const std::string& name() const = 0;
  virtual RowOutcome evaluate_row(const TupleRow& row) const = 0;
};

struct ConstantCost {
  double ms_per_tuple = 0.0;
};
struct SizeLinearCost {
  double ms_per_unit = 0.0;
  double base_ms = 0.0;
};
using CostModel = std::variant<ConstantCost, SizeLinearCost>;

// Verdict drawn per tuple from hash(seed ^ tuple_id); independent of batch composition.
struct SeededBernoulli {
  double p = 0.5;
  std::uint64_t seed = 0;
};
// Verdict from a simple comparison on row attributes.
struct AttributeRule {
  ql::Filter rule;
};
// Passes iff the tuple id lies in one of the ranges.
struct RangeRule {
  std::vector<TupleRange> pass;
};
using DecisionModel = std::variant<SeededBernoulli, AttributeRule, RangeRule>;

enum class ExecutionMode { Tick, Sleep, BusySpin };

struct UdfSpec {
  std::string name;
  CostModel cost = ConstantCost{};
  DecisionModel decision = SeededBernoulli{};
  std::set<TupleId> fail_on;  // rows that raise UdfError (failure-policy testing)
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Uniform draw in [0, 1) for (seed, tuple_id).
double unit_draw(std::uint64_t seed, TupleId tuple_id);

class SyntheticUdf final : public Udf {
 public:
  explicit SyntheticUdf(UdfSpec spec);

  const std::string& name() const override { return spec_.name; }
  RowOutcome evaluate_row(const TupleRow& row) const override;
  const UdfSpec& spec() const { return spec_; }

  bool verdict(const TupleRow& row) const;
  double cost_ms(const TupleRow& row) const;

 private:
  UdfSpec spec_;
};

struct EvalResult {
  RoutingBatch survivors;          // rows with verdict pass, in input order
  std::vector<bool> verdicts;      // parallel to the input rows
  double elapsed_ms = 0.0;         // compute time, already scaled by device speed
  std::size_t cache_hits = 0;
  std::vector<std::pair<TupleId, bool>> cache_writes;  // verdicts to persist on completion
};

// Evaluates every row. Rows found in the cache are answered from it at zero
// cost; the rest are computed and, if the predicate is cacheable, queued as
// cache writes. Throws UdfError.
EvalResult evaluate(const Udf& udf, const RoutingBatch& batch, const VerdictCache* cache,
                    bool cacheable, double speed_factor = 1.0);

}  // namespace aqp
