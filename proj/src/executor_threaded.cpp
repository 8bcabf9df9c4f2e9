// Wall-clock execution: pull, router, one thread per laminar and one per
// activated worker, connected by bounded blocking queues.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <thread>

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"
#include "executors.hpp"

namespace aqp::detail {

namespace {

using Clock = std::chrono::steady_clock;

template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : cap_(capacity) {}

  bool try_push(T& v) {
    std::lock_guard lock(mu_);
    if (closed_ || q_.size() >= cap_) return false;
    q_.push_back(std::move(v));
    cv_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop_front();
    return v;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return q_.size();
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    cv_.notify_all();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> q_;
  std::size_t cap_;
  bool closed_ = false;
};

// Wakes a single waiting activity; the counter avoids lost wakeups.
class Signal {
 public:
  void raise() {
    {
      std::lock_guard lock(mu_);
      ++count_;
    }
    cv_.notify_all();
  }
  std::uint64_t count() {
    std::lock_guard lock(mu_);
    return count_;
  }
  void wait_past(std::uint64_t seen, const std::atomic<bool>& stop, std::chrono::milliseconds limit) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, limit, [&] { return count_ != seen || stop.load(); });
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t count_ = 0;
};

struct QueuedBatch {
  RoutingBatch batch;
  double estimate = 0.0;
};

struct TLaminar {
  explicit TLaminar(LaminarRouter r, std::size_t input_len, std::size_t worker_len)
      : router(std::move(r)), input(input_len) {
    for (std::size_t i = 0; i < router.workers().size(); ++i) {
      worker_queues.push_back(std::make_unique<BoundedQueue<QueuedBatch>>(worker_len));
    }
  }
  LaminarRouter router;
  BoundedQueue<RoutingBatch> input;
  std::vector<std::unique_ptr<BoundedQueue<QueuedBatch>>> worker_queues;
  std::vector<std::thread> worker_threads;
  Signal wake;
  std::mutex mailbox_mu;
  std::vector<std::pair<WorkerId, double>> mailbox;  // completions awaiting ledger update
  std::thread thread;
};

class ThreadedRun {
 public:
  ThreadedRun(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts)
      : opts_(opts),
        memory_(opts.devices),
        batches_(make_batches(rows, opts.pipeline.routing_batch_rows)),
        router_(EddyRouter(plan.aqp, opts.eddy, cache_pointers(plan, opts)), opts.failure,
                RouterEnv{&central_, &outstanding_, &log_, [this] { return now(); },
                          [this](PredicateId p, RoutingBatch& b) { return laminars_.at(p)->input.try_push(b); }}) {
    for (const auto& spec : plan.aqp) {
      laminars_.push_back(std::make_unique<TLaminar>(
          LaminarRouter(spec, pool_devices(spec, opts.devices), opts.laminar, &memory_),
          opts.pipeline.laminar_input_queue_len, opts.pipeline.worker_input_queue_len));
    }
    caches_.resize(plan.aqp.size());
    for (const auto& [pid, c] : opts.caches) {
      if (pid < caches_.size()) caches_[pid] = c;
    }
  }

  RunResult run() {
    start_ = Clock::now();
    for (std::size_t p = 0; p < laminars_.size(); ++p) {
      laminars_[p]->thread = std::thread([this, p] { guarded([&] { laminar_loop(static_cast<PredicateId>(p)); }); });
    }
    std::thread router([this] { guarded([&] { router_loop(); }); });
    std::thread pull([this] { guarded([&] { pull_loop(); }); });

    std::string watchdog_dump;
    std::size_t last_size = 0;
    auto last_change = Clock::now();
    {
      std::unique_lock lock(cm_);
      while (!finished_ && !stop_) {
        done_cv_.wait_for(lock, std::chrono::milliseconds(20));
        std::size_t n = log_.size();
        if (n != last_size) {
          last_size = n;
          last_change = Clock::now();
        } else if (std::chrono::duration<double, std::milli>(Clock::now() - last_change).count() >
                   opts_.watchdog_ms) {
          watchdog_dump = router_.dump().dump();
          stop_ = true;
        }
      }
    }
    wake_all();
    pull.join();
    router.join();
    for (auto& l : laminars_) l->input.close();
    for (auto& l : laminars_) {
      if (l->thread.joinable()) l->thread.join();
    }
    if (!watchdog_dump.empty()) throw WatchdogAbort("no progress for " + std::to_string(opts_.watchdog_ms) + " ms: " + watchdog_dump);
    if (error_) std::rethrow_exception(error_);

    std::vector<LaminarRouter> routers;
    for (auto& l : laminars_) routers.push_back(l->router);
    Event e = make_event(done_at_, EventKind::Eos);
    e.rows_out = router_.output().size();
    e.queue_len = central_.size();
    e.detail = {{"workers", workers_json(routers)}, {"stats", router_.eddy().stats_json()}};
    log_.append(std::move(e));
    for (auto& l : laminars_) l->router.shutdown();

    RunResult r;
    r.output = std::move(router_.output());
    r.events = log_.snapshot();
    r.total_ms = done_at_;
    r.final_stats = router_.eddy().stats();
    return r;
  }

 private:
  double now() const { return std::chrono::duration<double, std::milli>(Clock::now() - start_).count(); }

  template <typename F>
  void guarded(F&& f) {
    try {
      f();
    } catch (...) {
      {
        std::lock_guard lock(cm_);
        if (!error_) error_ = std::current_exception();
        stop_ = true;
      }
      wake_all();
    }
  }

  void wake_all() {
    done_cv_.notify_all();
    router_cv_.notify_all();
    space_cv_.notify_all();
    for (auto& l : laminars_) {
      l->wake.raise();
      if (stop_) {
        l->input.close();
        for (auto& q : l->worker_queues) q->close();
      }
    }
  }

  void notify_router_locked() {
    router_.notify();
    ++router_signals_;
    router_cv_.notify_one();
  }

  void pull_loop() {
    bool rejecting = false;
    std::size_t next = 0;
    while (next < batches_.size()) {
      {
        std::lock_guard lock(cm_);
        if (stop_) return;
        if (try_enqueue_central(opts_.central, central_.size(), InsertOrigin::Pull, outstanding_)) {
          RoutingBatch b = std::move(batches_[next++]);
          b.created_at = now();
          Event e = make_event(b.created_at, EventKind::Pull);
          e.batch_id = b.batch_id;
          e.rows_in = b.rows.size();
          e.queue_len = central_.size();
          e.detail = {{"outstanding", outstanding_}};
          if (!b.rows.empty()) {
            e.detail["first"] = b.rows.front().tuple_id;
            e.detail["last"] = b.rows.back().tuple_id;
          }
          log_.append(std::move(e));
          central_.push_back(std::move(b));
          ++outstanding_;
          rejecting = false;
          notify_router_locked();
          continue;
        }
        if (!rejecting) {
          Event e = make_event(now(), EventKind::RejectInsert);
          e.queue_len = central_.size();
          e.batch_id = batches_[next].batch_id;
          e.detail = {{"outstanding", outstanding_}, {"gate", opts_.central.pull_gate()}};
          log_.append(std::move(e));
          rejecting = true;
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    while (true) {
      {
        std::lock_guard lock(cm_);
        if (stop_) return;
        if (central_.size() < opts_.central.capacity) {
          central_.push_back(EndOfStream{});
          notify_router_locked();
          return;
        }
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }

  void router_loop() {
    std::unique_lock lock(cm_);
    std::uint64_t seen = 0;
    while (!stop_) {
      seen = router_signals_;
      router_.pass();
      space_cv_.notify_all();
      if (router_.done()) {
        done_at_ = now();
        finished_ = true;
        done_cv_.notify_all();
        return;
      }
      router_cv_.wait_for(lock, std::chrono::milliseconds(50), [&] { return router_signals_ != seen || stop_; });
    }
  }

  void signal_router() {
    std::lock_guard lock(cm_);
    notify_router_locked();
  }

  void drain_mailbox(TLaminar& l) {
    std::vector<std::pair<WorkerId, double>> done;
    {
      std::lock_guard lock(l.mailbox_mu);
      done.swap(l.mailbox);
    }
    for (auto [w, est] : done) l.router.on_complete(w, est);
  }

  void laminar_loop(PredicateId p) {
    TLaminar& l = *laminars_[p];
    while (auto batch = l.input.pop()) {
      signal_router();
      while (!stop_) {
        const std::uint64_t seen = l.wake.count();
        drain_mailbox(l);
        WorkerChoice c = l.router.choose(*batch);
        auto& wq = *l.worker_queues[c.worker_id];
        if (wq.size() >= opts_.pipeline.worker_input_queue_len) {
          l.wake.wait_past(seen, stop_, std::chrono::milliseconds(50));
          continue;
        }
        if (!l.router.commit(c)) continue;
        const auto& ctx = l.router.worker(c.worker_id);
        if (c.activate) {
          Event e = make_event(now(), EventKind::ActivateWorker);
          e.predicate_id = p;
          e.worker_id = c.worker_id;
          e.device_id = ctx.device_id;
          e.detail = {{"resident_memory", ctx.resident_memory},
                      {"device_mem_used", memory_.used(ctx.device_id)},
                      {"device_mem_total", memory_.total(ctx.device_id)},
                      {"active", l.router.active_count()},
                      {"target", l.router.sized() ? nlohmann::json(l.router.target()) : nlohmann::json(nullptr)}};
          log_.append(std::move(e));
          const WorkerId id = c.worker_id;
          l.worker_threads.emplace_back([this, p, id] { guarded([&] { worker_loop(p, id); }); });
        }
        Event e = make_event(now(), EventKind::Enqueue);
        e.batch_id = batch->batch_id;
        e.predicate_id = p;
        e.worker_id = c.worker_id;
        e.device_id = ctx.device_id;
        e.queue_len = wq.size();
        e.rows_in = batch->rows.size();
        e.detail = {{"estimate", c.estimate}, {"ledger", l.router.ledger_json()}};
        log_.append(std::move(e));
        QueuedBatch qb{std::move(*batch), c.estimate};
        wq.try_push(qb);
        break;
      }
    }
    for (auto& q : l.worker_queues) q->close();
    for (auto& t : l.worker_threads) t.join();
    drain_mailbox(l);
  }

  void spend(double ms) {
    if (ms <= 0.0) return;
    auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(ms));
    if (opts_.wall_execution == ExecutionMode::BusySpin) {
      while (Clock::now() < until && !stop_) {
      }
    } else {
      std::this_thread::sleep_until(until);
    }
  }

  void worker_loop(PredicateId p, WorkerId id) {
    TLaminar& l = *laminars_[p];
    const PredicateSpec spec = l.router.spec();
    const DeviceSpec dev = l.router.device_of(id);
    const DeviceId device_id = l.router.worker(id).device_id;
    VerdictCache* cache = caches_[p].get();
    spend(opts_.laminar.startup_ms);
    while (auto job = l.worker_queues[id]->pop()) {
      l.wake.raise();
      const double t0 = now();
      EvalResult result;
      std::optional<std::string> error;
      try {
        result = evaluate(*spec.udf, job->batch, cache, spec.cacheable && cache != nullptr, dev.speed_factor);
      } catch (const UdfError& e) {
        if (opts_.failure == FailurePolicy::Abort) throw;
        error = e.what();
      }
      spend(result.elapsed_ms);
      if (cache != nullptr && !result.cache_writes.empty()) {
        const std::uint64_t h = VerdictCache::name_hash(spec.udf->name());
        for (auto [tid, v] : result.cache_writes) cache->put(CacheKey{h, tid}, v);
        cache->flush();
      }
      const double t1 = now();
      Event e = make_event(t1, EventKind::Evaluate);
      e.batch_id = job->batch.batch_id;
      e.predicate_id = p;
      e.worker_id = id;
      e.device_id = device_id;
      e.rows_in = job->batch.rows.size();
      e.rows_out = error ? 0 : result.survivors.rows.size();
      e.elapsed_ms = t1 - t0;
      e.cache_hits = result.cache_hits;
      e.detail = {{"start", t0}};
      if (error) e.detail["error"] = *error;
      log_.append(std::move(e));
      {
        std::lock_guard lock(l.mailbox_mu);
        l.mailbox.emplace_back(id, job->estimate);
      }
      l.wake.raise();

      WorkerReturn ret;
      ret.worker_id = id;
      ret.obs = Observation{p, job->batch.rows.size(), result.survivors.rows.size(), t1 - t0, result.cache_hits};
      if (error) {
        ret.batch = std::move(job->batch);
        ret.error = error;
      } else {
        ret.batch = std::move(result.survivors);
      }
      std::unique_lock lock(cm_);
      space_cv_.wait(lock, [&] {
        return stop_ || try_enqueue_central(opts_.central, central_.size(), InsertOrigin::WorkerReturn);
      });
      if (stop_) return;
      Event r = make_event(now(), EventKind::Return);
      r.batch_id = ret.batch.batch_id;
      r.predicate_id = p;
      r.worker_id = id;
      r.queue_len = central_.size();
      r.rows_out = ret.batch.rows.size();
      log_.append(std::move(r));
      central_.push_back(std::move(ret));
      notify_router_locked();
    }
  }

  RunOptions opts_;
  EventLog log_;
  DeviceMemory memory_;
  std::mutex cm_;  // guards central_, outstanding_, router_, flags
  std::condition_variable router_cv_;
  std::condition_variable space_cv_;
  std::condition_variable done_cv_;
  std::deque<CentralItem> central_;
  std::size_t outstanding_ = 0;
  std::uint64_t router_signals_ = 0;
  std::vector<RoutingBatch> batches_;
  RouterCore router_;
  std::vector<std::unique_ptr<TLaminar>> laminars_;
  std::vector<std::shared_ptr<VerdictCache>> caches_;
  std::atomic<bool> stop_{false};
  bool finished_ = false;
  double done_at_ = 0.0;
  std::exception_ptr error_;
  Clock::time_point start_;
};

}  // namespace

RunResult run_threaded(const ql::PhysicalPlan& plan, const std::vector<TupleRow>& rows, const RunOptions& opts) {
  ThreadedRun run(plan, rows, opts);
  return run.run();
}

}  // namespace aqp::detail
