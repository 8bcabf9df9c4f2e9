#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "aqp/core.hpp"
#include "aqp/eddy.hpp"
#include "aqp/event_log.hpp"
#include "aqp/laminar.hpp"
#include "aqp/querylang.hpp"
#include "aqp/simdev.hpp"
#include "aqp/udf.hpp"

namespace aqp {

class VerdictCache;

struct CentralQueueConfig {
  std::size_t capacity = 100;
  double lambda = 0.3;

  // Slots the pull side may fill: floor(lambda * capacity).
  std::size_t pull_gate() const;
  // Throws Error when the gate is zero or lambda is outside (0, 1].
  void validate() const;
};

enum class InsertOrigin { Pull, WorkerReturn };

// Admission rule for the central queue. Pull inserts need len below the gate
// and fewer than capacity - gate batches in flight; returns only need a free slot.
bool try_enqueue_central(const CentralQueueConfig& cfg, std::size_t len, InsertOrigin origin,
                         std::size_t outstanding = 0);

struct PipelineConfig {
  std::size_t routing_batch_rows = 10;
  std::size_t laminar_input_queue_len = 2;
  std::size_t worker_input_queue_len = 2;

  void validate() const;
};

// Splits rows into batches of at most batch_rows, ids first_id, first_id+1, ...
std::vector<RoutingBatch> make_batches(const std::vector<TupleRow>& rows, std::size_t batch_rows,
                                       BatchId first_id = 0);

// Which predicates each in-flight batch has already visited. Predicate ids
// must be < 64.
class VisitationTable {
 public:
  explicit VisitationTable(std::size_t predicate_count);

  void open(BatchId id);
  bool contains(BatchId id) const { return visited_.contains(id); }
  std::uint64_t visited(BatchId id) const;
  // Throws DuplicateReturn if already visited.
  void mark(BatchId id, PredicateId p);
  bool complete(BatchId id) const;
  void erase(BatchId id);
  std::size_t size() const { return visited_.size(); }
  std::size_t predicate_count() const { return n_; }
  std::uint64_t full_mask() const;

 private:
  std::size_t n_;
  std::unordered_map<BatchId, std::uint64_t> visited_;
};

// Drops the batch's entry. Throws IncompleteBatch unless every predicate was visited.
void retire_batch(VisitationTable& vt, const RoutingBatch& batch);

// A returned batch together with what the worker observed.
struct WorkerReturn {
  RoutingBatch batch;
  Observation obs;
  WorkerId worker_id = 0;
  std::optional<std::string> error;  // set when the UDF failed and the batch is dropped
};
struct EndOfStream {};

using CentralItem = std::variant<RoutingBatch, WorkerReturn, EndOfStream>;

enum class RunMode { Virtual, Wall };
enum class FailurePolicy { Abort, DropBatch };

struct RunOptions {
  RunMode mode = RunMode::Virtual;
  PipelineConfig pipeline;
  CentralQueueConfig central;
  EddyConfig eddy;
  LaminarConfig laminar;
  std::vector<DeviceSpec> devices;  // a default cpu device is used when empty
  // Cache bound to each AQP predicate (by plan predicate id); absent means no cache.
  std::map<PredicateId, std::shared_ptr<VerdictCache>> caches;
  FailurePolicy failure = FailurePolicy::Abort;
  double watchdog_ms = 30000.0;  // no progress for this long aborts the query
  ExecutionMode wall_execution = ExecutionMode::Sleep;
};

struct RunResult {
  std::vector<TupleRow> output;
  std::vector<Event> events;
  double total_ms = 0.0;
  std::vector<RuntimeStats> final_stats;
};

// Rows the scan feeds to the AQP stage: range restriction and simple filters applied.
std::vector<TupleRow> scan_rows(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& source);

// Keeps only projected attributes (all when the projection is empty).
TupleRow project(const TupleRow& row, const std::vector<std::string>& projection);

// Executes the plan over source. Throws WatchdogAbort, UdfError (abort policy), Error.
RunResult run_query(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& source,
                    const RunOptions& options);

}  // namespace aqp
