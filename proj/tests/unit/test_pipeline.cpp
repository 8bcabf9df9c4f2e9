#include <doctest.h>

#include <random>
#include <set>

#include "../support/checks.hpp"
#include "aqp/errors.hpp"
#include "aqp/pipeline.hpp"

using namespace aqp;
using namespace aqp::testing;

TEST_CASE("batching") {
  const auto b = make_batches(id_rows(0, 25), 10);
  REQUIRE(b.size() == 3);
  CHECK(b[0].rows.size() == 10);
  CHECK(b[1].rows.size() == 10);
  CHECK(b[2].rows.size() == 5);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i].batch_id == i);
  CHECK(make_batches({}, 10).empty());
  CHECK(make_batches(id_rows(0, 3), 10, 7)[0].batch_id == 7);
}

TEST_CASE("central queue admission") {
  CentralQueueConfig c;
  CHECK(c.pull_gate() == 30);
  CHECK(try_enqueue_central(c, 29, InsertOrigin::Pull));
  CHECK_FALSE(try_enqueue_central(c, 30, InsertOrigin::Pull));
  CHECK(try_enqueue_central(c, 99, InsertOrigin::WorkerReturn));
  CHECK_FALSE(try_enqueue_central(c, 100, InsertOrigin::WorkerReturn));
  CHECK_FALSE(try_enqueue_central(c, 0, InsertOrigin::Pull, 70));
  CHECK(try_enqueue_central(c, 0, InsertOrigin::Pull, 69));
  CHECK_THROWS_AS((CentralQueueConfig{100, 0.001}.validate()), Error);
  CHECK_THROWS_AS((CentralQueueConfig{100, 1.0}.validate()), Error);
}

TEST_CASE("visitation and retirement") {
  VisitationTable vt(2);
  RoutingBatch b;
  b.batch_id = 4;
  vt.open(4);
  vt.mark(4, 0);
  CHECK_THROWS_AS(retire_batch(vt, b), IncompleteBatch);
  CHECK_THROWS_AS(vt.mark(4, 0), DuplicateReturn);
  vt.mark(4, 1);
  CHECK(vt.complete(4));
  CHECK_NOTHROW(retire_batch(vt, b));
  CHECK_FALSE(vt.contains(4));
}

TEST_CASE("plan without adaptive stage is scan, filter and project") {
  ql::PhysicalPlan plan;
  plan.scan.dataset = "t";
  plan.simple_filters = ql::parse("scan t | filter id < 5").filters;
  const auto r = run_query(plan, id_rows(0, 20), RunOptions{});
  CHECK(sorted_ids(r.output) == std::vector<TupleId>{0, 1, 2, 3, 4});
  for (const auto& e : r.events) CHECK(e.kind != EventKind::Route);
}

TEST_CASE("empty source ends immediately") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{1}, SeededBernoulli{0.5, 1}, {}}});
  const auto r = run_query(plan, {}, RunOptions{});
  CHECK(r.output.empty());
  REQUIRE_FALSE(r.events.empty());
  CHECK(r.events.back().kind == EventKind::Eos);
}

TEST_CASE("output equals the sequential reference for the measured two-predicate workload") {
  const auto plan = synthetic_plan({UdfSpec{"breed", ConstantCost{28.315}, SeededBernoulli{0.227, 101}, {}},
                                    UdfSpec{"color", ConstantCost{1.974}, SeededBernoulli{0.056, 202}, {}}});
  const auto rows = id_rows(0, 3000);
  for (auto policy : {RoutingPolicyKind::CostDriven, RoutingPolicyKind::ScoreDriven,
                      RoutingPolicyKind::SelectivityDriven}) {
    RunOptions o;
    o.eddy.policy = policy;
    const auto r = run_query(plan, rows, o);
    CHECK(sorted_ids(r.output) == reference_output(plan, rows));
    CHECK(exactly_once(r.events, 2));
    CHECK(no_loss(r.events, rows.size()));
    CHECK(gate_respected(r.events, o.central.pull_gate()));
  }
}

TEST_CASE("batches emptied by a predicate still finish their route") {
  const auto plan = synthetic_plan({UdfSpec{"none", ConstantCost{1}, RangeRule{}, {}},
                                    UdfSpec{"all", ConstantCost{5}, RangeRule{{{0, 1000}}}, {}}});
  RunOptions o;
  o.eddy.static_order = {0, 1};
  const auto r = run_query(plan, id_rows(0, 50), o);
  CHECK(r.output.empty());
  const auto v = exactly_once(r.events, 2);
  CHECK_MESSAGE(v.ok, v.why);
  std::size_t empty_evals = 0;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::Evaluate && e.predicate_id == 1u && e.rows_in == 0u) ++empty_evals;
  }
  CHECK(empty_evals == 5);
}

TEST_CASE("stress: tight queues, ten thousand batches, random policy churn") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{0.5}, SeededBernoulli{0.7, 1}, {}},
                                    UdfSpec{"B", ConstantCost{0.3}, SeededBernoulli{0.8, 2}, {}},
                                    UdfSpec{"C", ConstantCost{0.9}, SeededBernoulli{0.9, 3}, {}}});
  RunOptions o;
  o.central = CentralQueueConfig{8, 0.3};
  o.pipeline = PipelineConfig{1, 2, 2};
  o.eddy.churn_every = 7;
  o.eddy.churn_seed = 99;
  o.laminar.startup_ms = 0;
  const auto rows = id_rows(0, 10000);
  RunResult r;
  REQUIRE_NOTHROW(r = run_query(plan, rows, o));
  CHECK(sorted_ids(r.output) == reference_output(plan, rows));
  for (const auto& v : {exactly_once(r.events, 3), no_loss(r.events, rows.size()),
                        gate_respected(r.events, o.central.pull_gate()), all_retired(r.events)}) {
    CHECK_MESSAGE(v.ok, v.why);
  }
}

TEST_CASE("virtual runs are byte-identical") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{3}, SeededBernoulli{0.4, 5}, {}},
                                    UdfSpec{"B", SizeLinearCost{1, 2}, SeededBernoulli{0.6, 6}, {}}});
  std::vector<TupleRow> rows = id_rows(0, 500);
  for (auto& r : rows) r.payload_size = r.tuple_id % 13;
  RunOptions o;
  o.eddy.churn_every = 5;
  const auto a = run_query(plan, rows, o);
  const auto b = run_query(plan, rows, o);
  CHECK(jsonl(a.events) == jsonl(b.events));
  CHECK(a.total_ms == b.total_ms);
}

TEST_CASE("failure policies") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{1}, SeededBernoulli{1.0, 5}, {13}}});
  RunOptions o;
  CHECK_THROWS_AS(run_query(plan, id_rows(0, 50), o), UdfError);
  o.failure = FailurePolicy::DropBatch;
  const auto r = run_query(plan, id_rows(0, 50), o);
  CHECK(r.output.size() == 40);  // batch 1 (ids 10..19) dropped
  const auto v = no_loss(r.events, 50);
  CHECK_MESSAGE(v.ok, v.why);
}

TEST_CASE("two workers on one device partition the batches") {
  auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{5}, SeededBernoulli{0.5, 5}, {}}});
  plan.aqp[0].max_workers = 2;
  RunOptions o;
  o.laminar.startup_ms = 0;
  const auto r = run_query(plan, id_rows(0, 400), o);
  std::map<WorkerId, std::set<BatchId>> by_worker;
  std::set<BatchId> dispatched;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::Evaluate) by_worker[*e.worker_id].insert(*e.batch_id);
    if (e.kind == EventKind::Route && e.predicate_id) dispatched.insert(*e.batch_id);
  }
  REQUIRE(by_worker.size() == 2);
  std::set<BatchId> both;
  for (BatchId b : by_worker[0]) {
    if (by_worker[1].contains(b)) both.insert(b);
  }
  CHECK(both.empty());
  std::set<BatchId> all = by_worker[0];
  all.insert(by_worker[1].begin(), by_worker[1].end());
  CHECK(all == dispatched);
}

TEST_CASE("watchdog aborts a stalled run with a queue dump") {
  const auto plan = synthetic_plan({UdfSpec{"slow", ConstantCost{1000}, SeededBernoulli{0.5, 5}, {}}});
  RunOptions o;
  o.watchdog_ms = 500;
  try {
    run_query(plan, id_rows(0, 10), o);
    FAIL("expected the watchdog to fire");
  } catch (const WatchdogAbort& e) {
    CHECK(std::string(e.what()).find("outstanding") != std::string::npos);
  }
}

TEST_CASE("wall mode produces the same rows and respects the safety invariants") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{0.2}, SeededBernoulli{0.5, 7}, {}},
                                    UdfSpec{"B", ConstantCost{0.05}, SeededBernoulli{0.5, 8}, {}}});
  RunOptions o;
  o.mode = RunMode::Wall;
  o.laminar.startup_ms = 5;
  o.central = CentralQueueConfig{8, 0.3};
  o.pipeline = PipelineConfig{2, 2, 2};
  o.eddy.churn_every = 3;
  const auto rows = id_rows(0, 400);
  const auto r = run_query(plan, rows, o);
  CHECK(sorted_ids(r.output) == reference_output(plan, rows));
  for (const auto& v : {exactly_once(r.events, 2), no_loss(r.events, rows.size()),
                        gate_respected(r.events, o.central.pull_gate()), all_retired(r.events)}) {
    CHECK_MESSAGE(v.ok, v.why);
  }
}

TEST_CASE("virtual and wall mode make the same steady routing decisions") {
  const auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{2}, SeededBernoulli{0.5, 7}, {}},
                                    UdfSpec{"B", ConstantCost{0.2}, SeededBernoulli{0.5, 8}, {}}});
  auto steady_firsts = [](const std::vector<Event>& events) {
    std::map<BatchId, PredicateId> m;
    for (const auto& e : events) {
      if (e.kind != EventKind::Route || !e.predicate_id) continue;
      const auto& reason = e.detail["reason"];
      if (reason.value("first", false) && reason.value("phase", "") == "steady") m[*e.batch_id] = *e.predicate_id;
    }
    return m;
  };
  RunOptions o;
  o.laminar.startup_ms = 0;
  const auto rows = id_rows(0, 300);
  const auto v = steady_firsts(run_query(plan, rows, o).events);
  o.mode = RunMode::Wall;
  const auto w = steady_firsts(run_query(plan, rows, o).events);
  REQUIRE_FALSE(v.empty());
  for (const auto& [b, p] : v) CHECK(p == 1);
  for (const auto& [b, p] : w) CHECK(p == 1);
}

TEST_CASE("memory ceiling holds at every logged activation") {
  PredicateSpec spec;
  auto plan = synthetic_plan({UdfSpec{"A", ConstantCost{10}, SeededBernoulli{0.5, 7}, {}},
                              UdfSpec{"B", ConstantCost{10}, SeededBernoulli{0.5, 8}, {}}});
  for (auto& p : plan.aqp) {
    p.pool = "gpu";
    p.worker_memory = 7;
  }
  RunOptions o;
  o.devices = {DeviceSpec{0, "gpu", 48, 1.0}, DeviceSpec{1, "gpu", 30, 1.0}};
  const auto r = run_query(plan, id_rows(0, 3000), o);
  const auto v = memory_ceiling(r.events, {{0, 48}, {1, 30}});
  CHECK_MESSAGE(v.ok, v.why);
  std::size_t activations = 0;
  for (const auto& e : r.events) activations += e.kind == EventKind::ActivateWorker;
  CHECK(activations == 6 + 4);  // floor(48/7) + floor(30/7) shared by both predicates
}
