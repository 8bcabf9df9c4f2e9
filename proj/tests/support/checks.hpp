#pragma once

// Independent oracles over event logs and a sequential reference executor,
// shared by the unit and acceptance suites.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aqp/event_log.hpp"
#include "aqp/pipeline.hpp"
#include "aqp/querylang.hpp"
#include "aqp/udf.hpp"

namespace aqp::testing {

struct Verdict {
  bool ok = true;
  std::string why;
  explicit operator bool() const { return ok; }
};

// Row-at-a-time evaluation of every filter, in textual order, with no
// batching, routing or caching. Returns passing tuple ids, sorted.
std::vector<TupleId> reference_output(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& source);

std::vector<TupleId> sorted_ids(const std::vector<TupleRow>& rows);

// At most one evaluation per (batch, predicate); exactly one per predicate
// for every batch that retired normally.
Verdict exactly_once(const std::vector<Event>& events, std::size_t predicates);

// Each evaluation consumes exactly the rows the previous stage kept, pulls
// account for every source row, and the output equals pulled minus filtered
// minus dropped.
Verdict no_loss(const std::vector<Event>& events, std::size_t source_rows);

// Pre-insertion central length below the gate at every pull.
Verdict gate_respected(const std::vector<Event>& events, std::size_t gate);

// Sum of activated footprints per device never exceeds its total.
Verdict memory_ceiling(const std::vector<Event>& events, const std::map<DeviceId, double>& totals);

// Every pulled batch retires exactly once.
Verdict all_retired(const std::vector<Event>& events);

std::string jsonl(const std::vector<Event>& events);

// Plan with one synthetic udf filter per spec, in order, on a cpu pool.
ql::PhysicalPlan synthetic_plan(const std::vector<UdfSpec>& udfs);

std::vector<TupleRow> id_rows(TupleId first, std::size_t n);

}  // namespace aqp::testing
