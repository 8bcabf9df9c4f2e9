#include "aqp/pipeline.hpp"

#include <cmath>

#include "aqp/errors.hpp"
#include "executors.hpp"

namespace aqp {

std::size_t CentralQueueConfig::pull_gate() const {
  return static_cast<std::size_t>(std::floor(lambda * static_cast<double>(capacity) + 1e-9));
}

void CentralQueueConfig::validate() const {
  if (capacity == 0) throw Error("central queue capacity must be positive");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error("lambda must lie in (0, 1]");
  if (pull_gate() < 1) throw Error("floor(lambda * capacity) must be >= 1");
  if (pull_gate() >= capacity) throw Error("lambda leaves no room for returning batches");
}

bool try_enqueue_central(const CentralQueueConfig& cfg, std::size_t len, InsertOrigin origin,
                         std::size_t outstanding) {
  if (origin == InsertOrigin::WorkerReturn) return len < cfg.capacity;
  const std::size_t gate = cfg.pull_gate();
  return len < gate && outstanding < cfg.capacity - gate;
}

void PipelineConfig::validate() const {
  if (routing_batch_rows == 0) throw Error("routing_batch_rows must be >= 1");
  if (laminar_input_queue_len == 0) throw Error("laminar_input_queue_len must be >= 1");
  if (worker_input_queue_len == 0) throw Error("worker_input_queue_len must be >= 1");
}

std::vector<RoutingBatch> make_batches(const std::vector<TupleRow>& rows, std::size_t batch_rows,
                                       BatchId first_id) {
  if (batch_rows == 0) throw Error("batch size must be >= 1");
  std::vector<RoutingBatch> out;
  for (std::size_t i = 0; i < rows.size(); i += batch_rows) {
    RoutingBatch b;
    b.batch_id = first_id + out.size();
    b.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(i),
                  rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), i + batch_rows)));
    out.push_back(std::move(b));
  }
  return out;
}

VisitationTable::VisitationTable(std::size_t predicate_count) : n_(predicate_count) {
  if (n_ > 64) throw Error("at most 64 predicates per AQP stage");
}

std::uint64_t VisitationTable::full_mask() const {
  return n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1;
}

void VisitationTable::open(BatchId id) { visited_.try_emplace(id, 0); }

std::uint64_t VisitationTable::visited(BatchId id) const {
  auto it = visited_.find(id);
  if (it == visited_.end()) throw Error("batch " + std::to_string(id) + " is not in flight");
  return it->second;
}

void VisitationTable::mark(BatchId id, PredicateId p) {
  if (p >= n_) throw Error("predicate " + std::to_string(p) + " outside the AQP stage");
  auto it = visited_.find(id);
  if (it == visited_.end()) throw Error("batch " + std::to_string(id) + " is not in flight");
  const std::uint64_t bit = std::uint64_t{1} << p;
  if (it->second & bit) {
    throw DuplicateReturn("batch " + std::to_string(id) + " returned twice from predicate " +
                          std::to_string(p));
  }
  it->second |= bit;
}

bool VisitationTable::complete(BatchId id) const { return visited(id) == full_mask(); }

void VisitationTable::erase(BatchId id) { visited_.erase(id); }

void retire_batch(VisitationTable& vt, const RoutingBatch& batch) {
  if (!vt.complete(batch.batch_id)) {
    throw IncompleteBatch("batch " + std::to_string(batch.batch_id) + " retired with unvisited predicates");
  }
  vt.erase(batch.batch_id);
}

std::vector<TupleRow> scan_rows(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& source) {
  std::vector<TupleRow> rows;
  for (const auto& r : source) {
    if (plan.scan.range && !plan.scan.range->contains(r.tuple_id)) continue;
    bool keep = true;
    for (const auto& f : plan.simple_filters) {
      if (!ql::eval_simple(f, r)) {
        keep = false;
        break;
      }
    }
    if (keep) rows.push_back(r);
  }
  return rows;
}

TupleRow project(const TupleRow& row, const std::vector<std::string>& projection) {
  if (projection.empty()) return row;
  TupleRow out{row.tuple_id, row.payload_size, {}};
  for (const auto& name : projection) {
    if (auto it = row.attributes.find(name); it != row.attributes.end()) out.attributes.insert(*it);
  }
  return out;
}

RunResult run_query(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& source,
                    const RunOptions& options) {
  options.pipeline.validate();
  options.central.validate();
  RunOptions opts = options;
  if (opts.devices.empty()) opts.devices.push_back(DeviceSpec{});
  std::vector<TupleRow> rows = scan_rows(plan, source);

  if (plan.aqp.empty()) {
    RunResult r;
    for (const auto& row : rows) r.output.push_back(project(row, plan.projection));
    Event e;
    e.kind = EventKind::Eos;
    e.rows_out = r.output.size();
    r.events.push_back(e);
    return r;
  }
  RunResult r = opts.mode == RunMode::Virtual ? detail::run_virtual(plan, rows, opts)
                                              : detail::run_threaded(plan, rows, opts);
  for (auto& row : r.output) row = project(row, plan.projection);
  return r;
}

}  // namespace aqp
