#include "executors.hpp"

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"

namespace aqp::detail {

std::vector<DeviceSpec> pool_devices(const PredicateSpec& spec, const std::vector<DeviceSpec>& devices) {
  std::vector<DeviceSpec> pool;
  for (const auto& d : devices) {
    if (d.pool == spec.pool) pool.push_back(d);
  }
  if (pool.empty()) throw Error("predicate '" + spec.name + "' names unknown pool '" + spec.pool + "'");
  return pool;
}

std::vector<const VerdictCache*> cache_pointers(const ql::PhysicalPlan& plan, const RunOptions& opts) {
  std::vector<const VerdictCache*> out(plan.aqp.size(), nullptr);
  for (const auto& [pid, cache] : opts.caches) {
    if (pid < out.size()) out[pid] = cache.get();
  }
  return out;
}

Event make_event(double ts, EventKind kind) {
  Event e;
  e.ts = ts;
  e.kind = kind;
  return e;
}

nlohmann::json workers_json(const std::vector<LaminarRouter>& laminars) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& l : laminars) {
    std::size_t idle = 0;
    nlohmann::json active = nlohmann::json::array();
    for (const auto& w : l.workers()) {
      if (w.state == WorkerState::Idle) {
        ++idle;
        continue;
      }
      active.push_back({{"worker_id", w.worker_id},
                        {"device_id", w.device_id},
                        {"state", std::string(to_string(w.state))},
                        {"resident_memory", w.resident_memory}});
    }
    double idle_mem = 0.0;
    for (const auto& w : l.workers()) {
      if (w.state == WorkerState::Idle) idle_mem += w.resident_memory;
    }
    arr.push_back({{"predicate_id", l.spec().predicate_id},
                   {"target", l.sized() ? nlohmann::json(l.target()) : nlohmann::json(nullptr)},
                   {"contexts", l.workers().size()},
                   {"activated", active},
                   {"idle", idle},
                   {"idle_resident_memory", idle_mem},
                   {"ledger", l.ledger_json()}});
  }
  return arr;
}

RouterCore::RouterCore(EddyRouter eddy, FailurePolicy failure, RouterEnv env)
    : eddy_(std::move(eddy)), vt_(eddy_.predicate_count()), failure_(failure), env_(std::move(env)) {}

nlohmann::json RouterCore::dump() const {
  return {{"central_len", env_.queue->size()},
          {"outstanding", *env_.outstanding},
          {"held", held_.size()},
          {"in_flight", vt_.size()},
          {"phase", eddy_.phase() == Phase::Warming ? "warming" : "steady"}};
}

void RouterCore::log_route(const RoutingDecision& d, std::size_t rows) {
  Event e = make_event(env_.now(), EventKind::Route);
  e.batch_id = d.batch_id;
  e.queue_len = env_.queue->size();
  e.rows_in = rows;
  if (d.action == RouteAction::Dispatch) {
    e.predicate_id = d.predicate_id;
    e.detail = {{"decision", "dispatch"}, {"reason", d.reason}, {"stats", eddy_.stats_json()}};
  } else {
    e.detail = {{"decision", "recycle"}};
  }
  env_.log->append(std::move(e));
}

bool RouterCore::dispatch(const RoutingDecision& d, RoutingBatch& batch) {
  const std::size_t rows = batch.rows.size();
  if (!env_.try_dispatch(d.predicate_id, batch)) return false;
  log_route(d, rows);
  eddy_.commit(d);
  return true;
}

RouterCore::Outcome RouterCore::route(RoutingBatch batch) {
  RoutingDecision d = eddy_.decide(batch, vt_.visited(batch.batch_id));
  switch (d.action) {
    case RouteAction::Retire: {
      retire_batch(vt_, batch);
      --*env_.outstanding;
      Event e = make_event(env_.now(), EventKind::Retire);
      e.batch_id = batch.batch_id;
      e.rows_out = batch.rows.size();
      e.queue_len = env_.queue->size();
      env_.log->append(std::move(e));
      for (auto& r : batch.rows) output_.push_back(std::move(r));
      return Outcome::Progress;
    }
    case RouteAction::Dispatch:
      if (!dispatch(d, batch)) held_.push_back(std::move(batch));
      return Outcome::Progress;
    case RouteAction::Recycle:
      log_route(d, batch.rows.size());
      env_.queue->push_back(std::move(batch));
      return Outcome::Recycled;
  }
  return Outcome::Progress;
}

RouterCore::Outcome RouterCore::handle(CentralItem item) {
  if (auto* b = std::get_if<RoutingBatch>(&item)) {
    vt_.open(b->batch_id);
    return route(std::move(*b));
  }
  if (auto* r = std::get_if<WorkerReturn>(&item)) {
    if (r->error) {
      if (failure_ == FailurePolicy::Abort) throw UdfError(*r->error);
      Event e = make_event(env_.now(), EventKind::Retire);
      e.batch_id = r->batch.batch_id;
      e.predicate_id = r->obs.predicate_id;
      e.rows_out = 0;
      e.queue_len = env_.queue->size();
      e.detail = {{"dropped", true}, {"error", *r->error}};
      env_.log->append(std::move(e));
      vt_.erase(r->batch.batch_id);
      --*env_.outstanding;
      return Outcome::Progress;
    }
    eddy_.on_return(vt_, r->batch.batch_id, r->obs);
    return route(std::move(r->batch));
  }
  if (*env_.outstanding > 0 || !held_.empty()) {
    env_.queue->push_back(EndOfStream{});
    return Outcome::Recycled;
  }
  return Outcome::Finished;
}

bool RouterCore::retry_held() {
  bool any = false;
  for (auto it = held_.begin(); it != held_.end();) {
    RoutingDecision d = eddy_.decide(*it, vt_.visited(it->batch_id));
    if (d.action == RouteAction::Dispatch) {
      if (dispatch(d, *it)) {
        it = held_.erase(it);
        any = true;
      } else {
        ++it;
      }
    } else {
      if (d.action == RouteAction::Recycle) log_route(d, it->rows.size());
      env_.queue->push_back(std::move(*it));
      it = held_.erase(it);
      any = true;
    }
  }
  return any;
}

bool RouterCore::pass() {
  if (done_ || generation_ == seen_) return false;
  seen_ = generation_;
  bool progress = retry_held();
  auto& q = *env_.queue;
  std::size_t streak = 0;
  while (!q.empty() && streak < q.size()) {
    CentralItem item = std::move(q.front());
    q.pop_front();
    Outcome o = handle(std::move(item));
    if (o == Outcome::Finished) {
      done_ = true;
      return true;
    }
    if (o == Outcome::Recycled) {
      ++streak;
    } else {
      streak = 0;
      progress = true;
    }
  }
  if (progress && retry_held()) seen_ = 0;
  return progress;
}

}  // namespace aqp::detail
