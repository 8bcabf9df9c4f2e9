#include <doctest.h>

#include <sstream>

#include "aqp/simdev.hpp"

using namespace aqp;

TEST_CASE("virtual clock fires in time then insertion order") {
  VirtualClock c;
  CHECK_FALSE(c.step());
  std::vector<int> order;
  c.schedule(5, [&] { order.push_back(1); });
  c.schedule(3, [&] { order.push_back(2); });
  c.schedule(5, [&] { order.push_back(3); });
  c.schedule(3, [&] { order.push_back(4); });
  while (c.step()) {
  }
  CHECK(order == std::vector<int>{2, 4, 1, 3});
  CHECK(c.now() == 5);
}

TEST_CASE("advance fires due events and moves time") {
  VirtualClock c;
  int fired = 0;
  c.schedule(2, [&] { ++fired; });
  c.schedule(9, [&] { ++fired; });
  const auto f = c.advance(4);
  CHECK(fired == 1);
  CHECK(f.size() == 1);
  CHECK(c.now() == 4);
  CHECK(c.next_time() == 9);
}

TEST_CASE("events scheduled in the past run now") {
  VirtualClock c;
  c.schedule(10, [] {});
  c.step();
  double at = -1;
  c.schedule(3, [&] { at = c.now(); });
  c.step();
  CHECK(at == 10);
}

TEST_CASE("utilization windows") {
  CHECK(sample_utilization({{0, 0, 100}}, 0, 0, 100).avg == doctest::Approx(1.0));
  CHECK(sample_utilization({}, 0, 0, 100).avg == 0.0);
  // 20 ms of work every 100 ms.
  std::vector<BusyInterval> duty;
  for (int i = 0; i < 10; ++i) duty.push_back({0, i * 100.0, i * 100.0 + 20});
  const auto u = sample_utilization(duty, 0, 0, 1000);
  CHECK(u.avg == doctest::Approx(0.2));
  CHECK(u.min == doctest::Approx(0.2));
  CHECK(u.max == doctest::Approx(0.2));
}

TEST_CASE("overlapping workers on one device count once") {
  const auto u = sample_utilization({{0, 0, 60}, {0, 40, 100}, {1, 0, 100}}, 0, 0, 200);
  CHECK(u.avg == doctest::Approx(0.5));
  CHECK(u.max == doctest::Approx(1.0));
  CHECK(u.min == doctest::Approx(0.0));
}

TEST_CASE("utilization series csv") {
  const auto rows = utilization_series({{0, 0, 500}, {1, 500, 1500}}, {0, 1}, 2000, 1000);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].device_id == 0);
  CHECK(rows[0].u.avg == doctest::Approx(0.5));
  std::ostringstream os;
  write_utilization_csv(os, rows);
  CHECK(os.str().rfind("t_start,t_end,device_id,avg,min,max\n", 0) == 0);
}
