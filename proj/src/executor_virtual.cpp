// Single-threaded discrete-event execution. After every fired clock event the
// activities are pumped (workers, laminars, router, pull) until none can move.

#include <memory>

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"
#include "executors.hpp"

namespace aqp::detail {

namespace {

struct QueuedBatch {
  RoutingBatch batch;
  double estimate = 0.0;
};

struct VWorker {
  std::deque<QueuedBatch> input;
  bool busy = false;
  double ready_at = 0.0;
  std::optional<WorkerReturn> finished;
};

struct VLaminar {
  std::deque<RoutingBatch> input;
  std::vector<VWorker> workers;
};

class VirtualRun {
 public:
  VirtualRun(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts)
      : plan_(plan),
        opts_(opts),
        memory_(opts.devices),
        batches_(make_batches(rows, opts.pipeline.routing_batch_rows)),
        router_(EddyRouter(plan.aqp, opts.eddy, cache_pointers(plan, opts)), opts.failure,
                RouterEnv{&central_, &outstanding_, &log_, [this] { return clock_.now(); },
                          [this](PredicateId p, RoutingBatch& b) { return to_laminar(p, b); }}) {
    for (const auto& spec : plan.aqp) {
      laminars_.emplace_back(spec, pool_devices(spec, opts.devices), opts.laminar, &memory_);
      VLaminar v;
      v.workers.resize(laminars_.back().workers().size());
      slots_.push_back(std::move(v));
    }
    caches_.resize(plan.aqp.size());
    for (const auto& [pid, c] : opts.caches) {
      if (pid < caches_.size()) caches_[pid] = c;
    }
  }

  RunResult run() {
    pump();
    while (!finished_) {
      if (clock_.empty()) throw WatchdogAbort("virtual executor stalled with no pending events: " + dump());
      if (clock_.next_time() - last_progress_ > opts_.watchdog_ms) {
        throw WatchdogAbort("no progress for " + std::to_string(opts_.watchdog_ms) + " ms: " + dump());
      }
      clock_.step();
      pump();
    }
    RunResult r;
    r.output = std::move(router_.output());
    r.events = log_.snapshot();
    r.total_ms = total_ms_;
    r.final_stats = router_.eddy().stats();
    return r;
  }

 private:
  void emit(Event e) {
    last_progress_ = clock_.now();
    log_.append(std::move(e));
  }

  std::string dump() const {
    nlohmann::json j = router_.dump();
    j["now"] = clock_.now();
    j["pulled"] = next_batch_;
    nlohmann::json lam = nlohmann::json::array();
    for (std::size_t p = 0; p < slots_.size(); ++p) {
      nlohmann::json w = nlohmann::json::object();
      for (std::size_t i = 0; i < slots_[p].workers.size(); ++i) {
        const auto& vw = slots_[p].workers[i];
        if (laminars_[p].workers()[i].state != WorkerState::Active) continue;
        w[std::to_string(i)] = {{"queued", vw.input.size()}, {"busy", vw.busy}, {"blocked", vw.finished.has_value()}};
      }
      lam.push_back({{"input", slots_[p].input.size()}, {"workers", w}});
    }
    j["laminars"] = lam;
    return j.dump();
  }

  bool to_laminar(PredicateId p, RoutingBatch& b) {
    auto& slot = slots_.at(p);
    if (slot.input.size() >= opts_.pipeline.laminar_input_queue_len) return false;
    slot.input.push_back(std::move(b));
    return true;
  }

  void pump() {
    bool any = true;
    while (any && !finished_) {
      any = false;
      any |= step_workers();
      any |= step_laminars();
      any |= router_.pass();
      if (router_.done()) {
        finish();
        return;
      }
      any |= step_pull();
    }
  }

  bool step_pull() {
    if (pull_done_ || clock_.now() < next_attempt_) return false;
    bool progress = false;
    while (next_batch_ < batches_.size()) {
      if (!try_enqueue_central(opts_.central, central_.size(), InsertOrigin::Pull, outstanding_)) {
        if (!rejecting_) {
          Event e = make_event(clock_.now(), EventKind::RejectInsert);
          e.queue_len = central_.size();
          e.batch_id = batches_[next_batch_].batch_id;
          e.detail = {{"outstanding", outstanding_}, {"gate", opts_.central.pull_gate()}};
          emit(std::move(e));
          rejecting_ = true;
        }
        backoff();
        return progress;
      }
      RoutingBatch b = std::move(batches_[next_batch_++]);
      b.created_at = clock_.now();
      Event e = make_event(clock_.now(), EventKind::Pull);
      e.batch_id = b.batch_id;
      e.rows_in = b.rows.size();
      e.queue_len = central_.size();
      e.detail = {{"outstanding", outstanding_}};
      if (!b.rows.empty()) {
        e.detail["first"] = b.rows.front().tuple_id;
        e.detail["last"] = b.rows.back().tuple_id;
      }
      emit(std::move(e));
      central_.push_back(std::move(b));
      ++outstanding_;
      rejecting_ = false;
      router_.notify();
      progress = true;
    }
    if (central_.size() >= opts_.central.capacity) {
      backoff();
      return progress;
    }
    central_.push_back(EndOfStream{});
    router_.notify();
    pull_done_ = true;
    return true;
  }

  void backoff() {
    next_attempt_ = clock_.now() + 1.0;
    clock_.schedule(next_attempt_, [] {});
  }

  bool step_laminars() {
    bool progress = false;
    for (std::size_t p = 0; p < slots_.size(); ++p) {
      auto& slot = slots_[p];
      auto& lam = laminars_[p];
      while (!slot.input.empty()) {
        RoutingBatch& b = slot.input.front();
        WorkerChoice c = lam.choose(b);
        auto& w = slot.workers[c.worker_id];
        if (w.input.size() >= opts_.pipeline.worker_input_queue_len) break;
        if (!lam.commit(c)) continue;
        const auto& ctx = lam.worker(c.worker_id);
        if (c.activate) {
          Event e = make_event(clock_.now(), EventKind::ActivateWorker);
          e.predicate_id = static_cast<PredicateId>(p);
          e.worker_id = c.worker_id;
          e.device_id = ctx.device_id;
          e.detail = {{"resident_memory", ctx.resident_memory},
                      {"device_mem_used", memory_.used(ctx.device_id)},
                      {"device_mem_total", memory_.total(ctx.device_id)},
                      {"active", lam.active_count()},
                      {"target", lam.sized() ? nlohmann::json(lam.target()) : nlohmann::json(nullptr)}};
          emit(std::move(e));
          w.ready_at = clock_.now() + opts_.laminar.startup_ms;
          if (opts_.laminar.startup_ms > 0.0) clock_.schedule(w.ready_at, [] {});
        }
        Event e = make_event(clock_.now(), EventKind::Enqueue);
        e.batch_id = b.batch_id;
        e.predicate_id = static_cast<PredicateId>(p);
        e.worker_id = c.worker_id;
        e.device_id = ctx.device_id;
        e.queue_len = w.input.size();
        e.rows_in = b.rows.size();
        e.detail = {{"estimate", c.estimate}, {"ledger", lam.ledger_json()}};
        emit(std::move(e));
        w.input.push_back(QueuedBatch{std::move(b), c.estimate});
        slot.input.pop_front();
        router_.notify();
        progress = true;
      }
    }
    return progress;
  }

  bool step_workers() {
    bool progress = false;
    for (std::size_t p = 0; p < slots_.size(); ++p) {
      auto& lam = laminars_[p];
      for (std::size_t i = 0; i < slots_[p].workers.size(); ++i) {
        if (lam.workers()[i].state != WorkerState::Active) continue;
        auto& w = slots_[p].workers[i];
        if (w.finished) {
          if (!try_enqueue_central(opts_.central, central_.size(), InsertOrigin::WorkerReturn)) continue;
          Event e = make_event(clock_.now(), EventKind::Return);
          e.batch_id = w.finished->batch.batch_id;
          e.predicate_id = static_cast<PredicateId>(p);
          e.worker_id = static_cast<WorkerId>(i);
          e.queue_len = central_.size();
          e.rows_out = w.finished->batch.rows.size();
          emit(std::move(e));
          central_.push_back(std::move(*w.finished));
          w.finished.reset();
          router_.notify();
          progress = true;
        }
        if (!w.busy && !w.finished && clock_.now() >= w.ready_at && !w.input.empty()) {
          start(static_cast<PredicateId>(p), static_cast<WorkerId>(i));
          progress = true;
        }
      }
    }
    return progress;
  }

  void start(PredicateId p, WorkerId id) {
    auto& w = slots_[p].workers[id];
    auto& lam = laminars_[p];
    const auto& spec = lam.spec();
    const auto& dev = lam.device_of(id);
    auto job = std::make_shared<QueuedBatch>(std::move(w.input.front()));
    w.input.pop_front();
    auto result = std::make_shared<EvalResult>();
    std::optional<std::string> error;
    VerdictCache* cache = caches_[p].get();
    try {
      *result = evaluate(*spec.udf, job->batch, cache, spec.cacheable && cache != nullptr, dev.speed_factor);
    } catch (const UdfError& e) {
      if (opts_.failure == FailurePolicy::Abort) throw;
      error = e.what();
    }
    w.busy = true;
    const double t0 = clock_.now();
    clock_.schedule(t0 + result->elapsed_ms, [this, p, id, t0, job, result, error] {
      finish_eval(p, id, t0, *job, *result, error);
    });
  }

  void finish_eval(PredicateId p, WorkerId id, double t0, QueuedBatch& job, EvalResult& result,
                   const std::optional<std::string>& error) {
    auto& w = slots_[p].workers[id];
    auto& lam = laminars_[p];
    w.busy = false;
    if (VerdictCache* cache = caches_[p].get(); cache != nullptr && !result.cache_writes.empty()) {
      const std::uint64_t h = VerdictCache::name_hash(lam.spec().udf->name());
      for (auto [tid, v] : result.cache_writes) cache->put(CacheKey{h, tid}, v);
      cache->flush();
    }
    Event e = make_event(clock_.now(), EventKind::Evaluate);
    e.batch_id = job.batch.batch_id;
    e.predicate_id = p;
    e.worker_id = id;
    e.device_id = lam.worker(id).device_id;
    e.rows_in = job.batch.rows.size();
    e.rows_out = error ? 0 : result.survivors.rows.size();
    e.elapsed_ms = result.elapsed_ms;
    e.cache_hits = result.cache_hits;
    e.detail = {{"start", t0}};
    if (error) e.detail["error"] = *error;
    emit(std::move(e));
    lam.on_complete(id, job.estimate);

    WorkerReturn ret;
    ret.worker_id = id;
    ret.obs = Observation{p, job.batch.rows.size(), result.survivors.rows.size(), result.elapsed_ms,
                          result.cache_hits};
    if (error) {
      ret.batch = std::move(job.batch);
      ret.error = error;
    } else {
      ret.batch = std::move(result.survivors);
    }
    w.finished = std::move(ret);
  }

  void finish() {
    finished_ = true;
    total_ms_ = clock_.now();
    Event e = make_event(clock_.now(), EventKind::Eos);
    e.rows_out = router_.output().size();
    e.queue_len = central_.size();
    e.detail = {{"workers", workers_json(laminars_)}, {"stats", router_.eddy().stats_json()}};
    emit(std::move(e));
    for (auto& l : laminars_) l.shutdown();
  }

  const ql::PhysicalPlan& plan_;
  RunOptions opts_;
  VirtualClock clock_;
  EventLog log_;
  DeviceMemory memory_;
  std::deque<CentralItem> central_;
  std::size_t outstanding_ = 0;
  std::vector<RoutingBatch> batches_;
  std::size_t next_batch_ = 0;
  bool pull_done_ = false;
  bool rejecting_ = false;
  double next_attempt_ = 0.0;
  RouterCore router_;
  std::vector<LaminarRouter> laminars_;
  std::vector<VLaminar> slots_;
  std::vector<std::shared_ptr<VerdictCache>> caches_;
  double last_progress_ = 0.0;
  double total_ms_ = 0.0;
  bool finished_ = false;
};

}  // namespace

RunResult run_virtual(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts) {
  VirtualRun run(plan, rows, opts);
  return run.run();
}

}  // namespace aqp::detail
