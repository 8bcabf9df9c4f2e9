#include <doctest.h>

#include <deque>
#include <random>

#include "aqp/errors.hpp"
#include "aqp/laminar.hpp"
#include "aqp/udf.hpp"

using namespace aqp;

namespace {

PredicateSpec gpu_pred(double footprint, std::optional<std::size_t> max_workers = std::nullopt,
                       CostHeuristic h = CostHeuristic::Constant) {
  PredicateSpec s;
  s.name = "detect";
  s.udf = std::make_shared<SyntheticUdf>(UdfSpec{"detect", ConstantCost{10}, SeededBernoulli{0.5, 1}, {}});
  s.pool = "gpu";
  s.worker_memory = footprint;
  s.max_workers = max_workers;
  s.cost_heuristic = h;
  return s;
}

std::vector<DeviceSpec> gpus(std::size_t n, double mem = 48) {
  std::vector<DeviceSpec> d;
  for (std::size_t i = 0; i < n; ++i) d.push_back(DeviceSpec{static_cast<DeviceId>(i), "gpu", mem, 1.0});
  return d;
}

RoutingBatch rows(std::size_t n, std::uint64_t payload = 1) {
  RoutingBatch b;
  for (std::size_t i = 0; i < n; ++i) b.rows.push_back(TupleRow{i, payload, {}});
  return b;
}

// Routes one batch and returns the chosen worker, retrying after a refused activation.
WorkerId route(LaminarRouter& l, const RoutingBatch& b) {
  for (int i = 0; i < 200; ++i) {
    const auto c = l.choose(b);
    if (l.commit(c)) return c.worker_id;
  }
  FAIL("laminar never accepted the batch");
  return 0;
}

}  // namespace

TEST_CASE("worker target from device memory") {
  CHECK(target_workers(48, 6, 50) == 8);
  CHECK(target_workers(48, 0.5, 50) == 50);
  CHECK(target_workers(48, 60, 50) == 1);
  CHECK_THROWS_AS(target_workers(48, std::nullopt, 50), WarmupPending);
}

TEST_CASE("heuristic load estimates") {
  RoutingBatch b;
  b.rows = {TupleRow{0, 100, {}}, TupleRow{1, 250, {}}};
  CHECK(heuristic_cost(b, CostHeuristic::PayloadSize) == 350);
  CHECK(heuristic_cost(rows(7), CostHeuristic::Constant) == 7);
  CHECK(heuristic_cost(RoutingBatch{}, CostHeuristic::PayloadSize) == 0);
}

TEST_CASE("round robin cycles over active workers") {
  CHECK(pick_worker_rr({0, 1}, 0) == 1);
  CHECK(pick_worker_rr({0, 1}, 1) == 0);
  CHECK(pick_worker_rr({0, 1}, std::nullopt) == 0);
  CHECK(pick_worker_rr({4}, 4) == 4);
  // A worker activated mid-stream joins at its id position.
  CHECK(pick_worker_rr({0, 1, 2}, 1) == 2);
  CHECK(pick_worker_rr({0, 2, 5}, 3) == 5);
}

TEST_CASE("data-aware picks the least loaded worker") {
  std::map<WorkerId, double> loads = {{0, 10}, {1, 4}};
  CHECK(pick_worker_data_aware(loads) == 1);
  loads[1] += 3;
  CHECK(loads[1] == 7);
  CHECK(pick_worker_data_aware({{0, 5}, {1, 5}}) == 0);
}

TEST_CASE("warmup runs one worker; sizing activates lazily up to the memory bound") {
  DeviceMemory mem(gpus(1));
  LaminarRouter l(gpu_pred(6), gpus(1), LaminarConfig{}, &mem);
  for (int i = 0; i < 5; ++i) CHECK(route(l, rows(10)) == 0);
  CHECK(l.active_count() == 1);
  CHECK_FALSE(l.sized());
  l.on_complete(0, 10);
  CHECK(l.sized());
  CHECK(l.target() == 8);
  std::set<WorkerId> used;
  for (int i = 0; i < 40; ++i) {
    used.insert(route(l, rows(10)));
    CHECK(l.active_count() <= 8);
  }
  CHECK(l.active_count() == 8);
  CHECK(used.size() == 8);
  CHECK(mem.used(0) == doctest::Approx(48));
  for (const auto& w : l.workers()) {
    if (w.state == WorkerState::Idle) CHECK(w.resident_memory == 0.0);
  }
}

TEST_CASE("small footprint is capped at the per-device context limit") {
  DeviceMemory mem(gpus(1));
  LaminarRouter l(gpu_pred(0.5), gpus(1), LaminarConfig{}, &mem);
  route(l, rows(1));
  l.on_complete(0, 1);
  for (int i = 0; i < 200; ++i) route(l, rows(1));
  CHECK(l.active_count() == 50);
  CHECK(l.workers().size() == 50);
}

TEST_CASE("devices alternate") {
  DeviceMemory mem(gpus(2));
  LaminarRouter l(gpu_pred(6), gpus(2), LaminarConfig{}, &mem);
  std::vector<DeviceId> seq;
  seq.push_back(l.worker(route(l, rows(1))).device_id);
  l.on_complete(0, 1);
  for (int i = 0; i < 3; ++i) seq.push_back(l.worker(route(l, rows(1))).device_id);
  CHECK(seq == std::vector<DeviceId>{0, 1, 0, 1});
  CHECK(l.device_targets() == std::vector<std::size_t>{8, 8});
}

TEST_CASE("one device: alternation is the identity") {
  DeviceMemory mem(gpus(1));
  LaminarRouter l(gpu_pred(6), gpus(1), LaminarConfig{}, &mem);
  route(l, rows(1));
  l.on_complete(0, 1);
  for (int i = 0; i < 10; ++i) CHECK(l.worker(route(l, rows(1))).device_id == 0);
}

TEST_CASE("memory shared across predicates caps activations") {
  DeviceMemory mem(gpus(1, 20));
  auto a = gpu_pred(6);
  auto b = gpu_pred(6);
  b.predicate_id = 1;
  LaminarRouter la(a, gpus(1, 20), LaminarConfig{}, &mem);
  LaminarRouter lb(b, gpus(1, 20), LaminarConfig{}, &mem);
  route(la, rows(1));
  route(lb, rows(1));
  la.on_complete(0, 1);
  lb.on_complete(0, 1);
  for (int i = 0; i < 20; ++i) {
    route(la, rows(1));
    route(lb, rows(1));
    CHECK(mem.used(0) <= 20.0 + 1e-9);
  }
  CHECK(la.active_count() + lb.active_count() == 3);
}

TEST_CASE("shutdown drains active workers and releases memory") {
  DeviceMemory mem(gpus(1));
  LaminarRouter l(gpu_pred(6), gpus(1), LaminarConfig{}, &mem);
  route(l, rows(1));
  l.on_complete(0, 1);
  l.shutdown();
  for (const auto& w : l.workers()) {
    CHECK(w.state == WorkerState::Stopped);
    CHECK(w.resident_memory == 0.0);
  }
  CHECK(mem.used(0) == 0.0);
}

TEST_CASE("ledger returns to zero once every batch completes") {
  DeviceMemory mem(gpus(1));
  LaminarRouter l(gpu_pred(6, std::nullopt, CostHeuristic::PayloadSize), gpus(1),
                  LaminarConfig{LaminarPolicy::DataAware}, &mem);
  std::mt19937_64 rng(3);
  std::deque<std::pair<WorkerId, double>> pending;
  for (int i = 0; i < 300; ++i) {
    const auto b = rows(1 + rng() % 5, 1 + rng() % 9);
    const auto c = l.choose(b);
    if (!l.commit(c)) continue;
    pending.emplace_back(c.worker_id, c.estimate);
    if (rng() % 2) {
      l.on_complete(pending.front().first, pending.front().second);
      pending.pop_front();
    }
  }
  while (!pending.empty()) {
    l.on_complete(pending.front().first, pending.front().second);
    pending.pop_front();
  }
  for (const auto& [id, load] : l.loads()) CHECK(load == 0.0);
}

namespace {

// Two identical workers serving FIFO; a batch of size s takes s ms and
// batches arrive every `gap` ms. Returns the highest outstanding load any
// worker reached.
double replay_peak(const std::vector<double>& sizes, LaminarPolicy policy, double gap) {
  std::map<WorkerId, double> load = {{0, 0}, {1, 0}};
  std::map<WorkerId, double> free_at = {{0, 0}, {1, 0}};
  std::map<WorkerId, std::deque<std::pair<double, double>>> queued;
  std::optional<WorkerId> last;
  double peak = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double t = static_cast<double>(i) * gap;
    for (auto& [w, q] : queued) {
      while (!q.empty() && q.front().first <= t) {
        load[w] -= q.front().second;
        q.pop_front();
      }
    }
    const WorkerId w =
        policy == LaminarPolicy::DataAware ? pick_worker_data_aware(load) : pick_worker_rr({0, 1}, last);
    last = w;
    load[w] += sizes[i];
    free_at[w] = std::max(t, free_at[w]) + sizes[i];
    queued[w].emplace_back(free_at[w], sizes[i]);
    peak = std::max(peak, load[w]);
  }
  return peak;
}

}  // namespace

TEST_CASE("property: data-aware never exceeds round-robin's peak on heavy/light alternation") {
  for (std::size_t n = 1; n <= 60; ++n) {
    for (double gap : {0.0, 1.0, 2.0, 5.0, 9.0, 20.0}) {
      std::vector<double> s;
      for (std::size_t i = 0; i < n; ++i) s.push_back(i % 2 ? 1.0 : 9.0);
      CHECK(replay_peak(s, LaminarPolicy::DataAware, gap) <= replay_peak(s, LaminarPolicy::RoundRobin, gap));
    }
  }
}

TEST_CASE("property: data-aware peak stays within one batch of round-robin's on random workloads") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5000; ++trial) {
    std::vector<double> s;
    double biggest = 0;
    for (std::size_t i = 1 + rng() % 40; i > 0; --i) {
      s.push_back(1.0 + static_cast<double>(rng() % 10));
      biggest = std::max(biggest, s.back());
    }
    const double gap = rng() % 4 == 0 ? 0.0 : static_cast<double>(1 + rng() % 8);
    CHECK(replay_peak(s, LaminarPolicy::DataAware, gap) <=
          replay_peak(s, LaminarPolicy::RoundRobin, gap) + biggest);
  }
}

TEST_CASE("policy names") {
  CHECK(parse_laminar_policy("rr") == LaminarPolicy::RoundRobin);
  CHECK(parse_laminar_policy("round-robin") == LaminarPolicy::RoundRobin);
  CHECK(parse_laminar_policy("data-aware") == LaminarPolicy::DataAware);
  CHECK_FALSE(parse_laminar_policy("random"));
}
