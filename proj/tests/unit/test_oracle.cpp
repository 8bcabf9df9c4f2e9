#include <doctest.h>

#include <random>
#include <sstream>

#include "../support/checks.hpp"
#include "aqp/oracle.hpp"
#include "aqp/pipeline.hpp"

using namespace aqp;
using namespace aqp::oracle;

TEST_CASE("empty scenario") { CHECK(completion_time({0, 1, 2, {}}) == 0); }

TEST_CASE("expensive predicate first: one survivor") {
  for (std::size_t pos = 1; pos <= 10; ++pos) {
    const double t = completion_time({10, 2, 1, mask_from_positions(10, {pos})});
    CHECK(t == (pos == 10 ? 21 : 20));
  }
}

TEST_CASE("cheap predicate first: six survivors") {
  const auto masks = masks_with(10, 6);
  CHECK(masks.size() == 210);
  std::set<std::vector<bool>> distinct(masks.begin(), masks.end());
  CHECK(distinct.size() == 210);
  double lo = 1e9, hi = 0;
  for (const auto& m : masks) {
    const double t = completion_time({10, 1, 2, m});
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  CHECK(lo == 13);
  CHECK(hi == 17);
  CHECK(completion_time({10, 1, 2, mask_from_positions(10, {2, 4, 6, 8, 9, 10})}) == 14);
}

TEST_CASE("cheap-first beats expensive-first for every pair of masks") {
  double worst_cheap = 0, best_expensive = 1e9;
  for (const auto& m : masks_with(10, 6)) worst_cheap = std::max(worst_cheap, completion_time({10, 1, 2, m}));
  for (const auto& m : masks_with(10, 1)) best_expensive = std::min(best_expensive, completion_time({10, 2, 1, m}));
  CHECK(worst_cheap < best_expensive);
}

TEST_CASE("sampling kicks in above the limit") {
  const auto m = masks_with(30, 15, 500, 3);
  CHECK(m.size() == 500);
  for (const auto& x : m) CHECK(std::count(x.begin(), x.end(), true) == 15);
  CHECK(masks_with(3, 5).empty());
}

TEST_CASE("order selection") {
  const Predicate2 a{10, 0.4}, b{20, 0.1};
  CHECK(first_of(Order::CostFirst, a, b) == 0);
  CHECK(first_of(Order::SelectivityFirst, a, b) == 1);
  CHECK(first_of(Order::ScoreFirst, a, b) == 0);  // 16.7 vs 22.2
  CHECK(first_of(Order::ScoreFirst, Predicate2{10, 0.9}, b) == 1);  // 100 vs 22.2
  CHECK(first_of(Order::CostFirst, a, a) == 0);
}

TEST_CASE("identical predicates give a speedup of exactly one") {
  const auto s = speedup({10, 0.5}, {10, 0.5}, Order::SelectivityFirst, 12);
  CHECK(s.min == 1.0);
  CHECK(s.mean == 1.0);
  CHECK(s.max == 1.0);
}

TEST_CASE("selectivity grid: cost-first is never slower in the per-item model") {
  std::vector<double> sel_a;
  for (int i = 1; i <= 9; ++i) sel_a.push_back(i / 10.0);
  const auto grid = policy_dominates(10, 20, sel_a, {0.1, 0.5, 0.9}, 10);
  CHECK(grid.size() == 27);
  for (const auto& c : grid) {
    CHECK(c.vs_selectivity.mean >= 1.0 - 1e-12);
    CHECK(c.vs_score.mean >= 1.0 - 1e-12);
  }
  std::ostringstream os;
  write_grid_csv(os, grid);
  const std::string csv = os.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 28);
}

TEST_CASE("engine with batch size one matches the schedule model exactly") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    const double c1 = 1 + static_cast<double>(rng() % 4);
    const double c2 = 1 + static_cast<double>(rng() % 4);
    std::vector<bool> mask(n);
    std::vector<TupleRange> pass;
    for (std::size_t i = 0; i < n; ++i) {
      mask[i] = rng() % 2;
      if (mask[i]) pass.push_back({i + 1, i + 2});
    }
    const auto plan = testing::synthetic_plan({UdfSpec{"first", ConstantCost{c1}, RangeRule{pass}, {}},
                                               UdfSpec{"second", ConstantCost{c2}, RangeRule{{{0, 100}}}, {}}});
    RunOptions o;
    o.pipeline.routing_batch_rows = 1;
    o.eddy.static_order = {0, 1};
    o.laminar.startup_ms = 0;
    const auto r = run_query(plan, testing::id_rows(1, n), o);
    CHECK(r.total_ms == completion_time({n, c1, c2, mask}));
  }
}
