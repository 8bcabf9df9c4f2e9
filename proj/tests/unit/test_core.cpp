#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "aqp/core.hpp"

using namespace aqp;

TEST_CASE("selectivity is the observed pass ratio") {
  RuntimeStats s;
  s.tuples_in = 1000;
  s.tuples_passed = 254;
  CHECK(selectivity(s) == doctest::Approx(0.254));
  CHECK(selectivity(RuntimeStats{}) == 0.5);
  s.tuples_in = 10;
  s.tuples_passed = 10;
  CHECK(selectivity(s) == 1.0);
}

TEST_CASE("score ranks cost against filtering power") {
  CHECK(score(2, 0.1) < score(1, 0.6));
  CHECK(score(2, 0.1) == doctest::Approx(2.0 / 0.9));
  CHECK(score(1, 0.6) == doctest::Approx(2.5));
  CHECK(score(5, 0.0) == 5.0);
  CHECK(std::isinf(score(3, 1.0)));
}

TEST_CASE("estimated cost discounts cached rows") {
  CHECK(estimated_cost(30, 0.9) == doctest::Approx(3.0));
  CHECK(estimated_cost(30, 1.0) == 0.0);
  CHECK(estimated_cost(30, 0.0) == 30.0);
}

TEST_CASE("cost smoothing") {
  RuntimeStats s;
  s = update_cost(s, 35.11, 0.2);
  CHECK(s.has_cost);
  CHECK(s.smoothed_cost_ms == doctest::Approx(35.11));
  RuntimeStats t;
  t.smoothed_cost_ms = 10;
  t.has_cost = true;
  CHECK(update_cost(t, 10, 0.2).smoothed_cost_ms == doctest::Approx(10));
  CHECK(update_cost(t, 20, 0.5).smoothed_cost_ms == doctest::Approx(15));
}

TEST_CASE("property: score is monotone in cost and selectivity") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(0.001, 100.0);
  std::uniform_real_distribution<double> s(0.0, 0.999);
  for (int i = 0; i < 2000; ++i) {
    const double c1 = c(rng), c2 = c(rng), s1 = s(rng), s2 = s(rng);
    if (c1 < c2) CHECK(score(c1, s1) < score(c2, s1));
    if (s1 < s2) CHECK(score(c1, s1) < score(c1, s2));
  }
}

TEST_CASE("property: estimated cost never exceeds cost") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> c(0.0, 100.0);
  std::uniform_real_distribution<double> h(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double cost = c(rng), hit = h(rng);
    CHECK(estimated_cost(cost, hit) <= cost);
    if (hit > 0 && cost > 0) CHECK(estimated_cost(cost, hit) < cost);
  }
  CHECK(estimated_cost(7, 0) == 7);
  CHECK(estimated_cost(0, 0.5) == 0);
}

TEST_CASE("measured use-case statistics put the colour classifier first under both rankings") {
  const double breed_cost = 28.315, breed_sel = 0.227;
  const double color_cost = 1.974, color_sel = 0.056;
  CHECK(color_cost < breed_cost);
  CHECK(score(color_cost, color_sel) == doctest::Approx(2.09).epsilon(0.01));
  CHECK(score(breed_cost, breed_sel) == doctest::Approx(36.63).epsilon(0.01));
  CHECK(score(color_cost, color_sel) < score(breed_cost, breed_sel));
}

TEST_CASE("policy names round-trip") {
  for (auto k : {RoutingPolicyKind::CostDriven, RoutingPolicyKind::ScoreDriven, RoutingPolicyKind::SelectivityDriven,
                 RoutingPolicyKind::ReuseAwareCostDriven}) {
    CHECK(parse_policy(to_string(k)) == k);
  }
  CHECK_FALSE(parse_policy("fastest"));
}

TEST_CASE("open tuple ranges exclude both ends") {
  const auto r = TupleRange::open(1000, 7000);
  CHECK_FALSE(r.contains(1000));
  CHECK(r.contains(1001));
  CHECK(r.contains(6999));
  CHECK_FALSE(r.contains(7000));
  CHECK(r.size() == 5999);
}
