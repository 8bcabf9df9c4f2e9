#pragma once

// Internals shared by the virtual and threaded executors.

#include <deque>
#include <functional>
#include <list>
#include <vector>

#include "aqp/pipeline.hpp"

namespace aqp::detail {

RunResult run_virtual(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts);
RunResult run_threaded(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts);

// Devices serving a pool, or throws Error naming the predicate.
std::vector<DeviceSpec> pool_devices(const PredicateSpec& spec, const std::vector<DeviceSpec>& devices);

std::vector<const VerdictCache*> cache_pointers(const ql::PhysicalPlan& plan, const RunOptions& opts);

// Event helpers.
Event make_event(double ts, EventKind kind);

// Worker-context summary attached to the eos event.
nlohmann::json workers_json(const std::vector<LaminarRouter>& laminars);

// What the router sees of the central queue. The caller guarantees exclusive
// access to queue and outstanding while a RouterCore method runs.
struct RouterEnv {
  std::deque<CentralItem>* queue = nullptr;
  std::size_t* outstanding = nullptr;
  EventLog* log = nullptr;
  std::function<double()> now;
  // Hands the batch to the predicate's laminar input queue; on success the
  // batch has been moved from.
  std::function<bool(PredicateId, RoutingBatch&)> try_dispatch;
};

// The central-queue consumer: retires complete batches, dispatches the rest,
// recycles during warmup and holds batches whose laminar queue is full.
class RouterCore {
 public:
  RouterCore(EddyRouter eddy, FailurePolicy failure, RouterEnv env);

  // Something was inserted or a laminar queue freed a slot.
  void notify() { ++generation_; }

  // Works through the queue once. Returns whether anything moved.
  bool pass();

  bool done() const { return done_; }
  std::vector<TupleRow>& output() { return output_; }
  const EddyRouter& eddy() const { return eddy_; }
  nlohmann::json dump() const;

 private:
  enum class Outcome { Progress, Recycled, Finished };

  Outcome handle(CentralItem item);
  Outcome route(RoutingBatch batch);
  bool dispatch(const RoutingDecision& d, RoutingBatch& batch);
  bool retry_held();
  void log_route(const RoutingDecision& d, std::size_t rows);

  EddyRouter eddy_;
  VisitationTable vt_;
  FailurePolicy failure_;
  RouterEnv env_;
  std::list<RoutingBatch> held_;
  std::vector<TupleRow> output_;
  std::uint64_t generation_ = 1;
  std::uint64_t seen_ = 0;
  bool done_ = false;
};

}  // namespace aqp::detail
