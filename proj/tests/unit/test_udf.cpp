#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"
#include "aqp/udf.hpp"

using namespace aqp;

namespace {

RoutingBatch batch_of(TupleId first, std::size_t n, std::uint64_t payload = 0) {
  RoutingBatch b;
  b.batch_id = 3;
  for (std::size_t i = 0; i < n; ++i) {
    TupleRow r;
    r.tuple_id = first + i;
    r.payload_size = payload;
    b.rows.push_back(r);
  }
  return b;
}

// Independent splitmix64 draw, recomputed here as the oracle.
bool bernoulli_oracle(double p, std::uint64_t seed, TupleId id) {
  std::uint64_t x = (seed ^ id) + 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return static_cast<double>(x >> 11) / 9007199254740992.0 < p;
}

}  // namespace

TEST_CASE("seeded bernoulli survivors are fixed by the seed") {
  SyntheticUdf udf(UdfSpec{"color", ConstantCost{1}, SeededBernoulli{0.6, 99}, {}});
  const auto b = batch_of(1, 10);
  const auto r = evaluate(udf, b, nullptr, false);
  std::vector<TupleId> expected;
  for (const auto& row : b.rows) {
    if (bernoulli_oracle(0.6, 99, row.tuple_id)) expected.push_back(row.tuple_id);
  }
  std::vector<TupleId> got;
  for (const auto& row : r.survivors.rows) got.push_back(row.tuple_id);
  CHECK(got == expected);
  CHECK(r.elapsed_ms == 10.0);
  CHECK(r.survivors.batch_id == 3);
}

TEST_CASE("bernoulli pass rate tracks p over many tuples") {
  SyntheticUdf udf(UdfSpec{"u", ConstantCost{1}, SeededBernoulli{0.227, 5}, {}});
  std::size_t pass = 0;
  for (TupleId id = 0; id < 100000; ++id) pass += udf.verdict(TupleRow{id, 0, {}}) ? 1 : 0;
  CHECK(static_cast<double>(pass) / 100000.0 == doctest::Approx(0.227).epsilon(0.02));
}

TEST_CASE("empty batch") {
  SyntheticUdf udf(UdfSpec{"u", ConstantCost{5}, SeededBernoulli{0.5, 1}, {}});
  const auto r = evaluate(udf, RoutingBatch{}, nullptr, false);
  CHECK(r.survivors.rows.empty());
  CHECK(r.elapsed_ms == 0.0);
}

TEST_CASE("size-linear cost is exact per row and scaled by device speed") {
  SyntheticUdf udf(UdfSpec{"u", SizeLinearCost{2.0, 1.5}, SeededBernoulli{1.0, 1}, {}});
  const auto r = evaluate(udf, batch_of(0, 4, 9), nullptr, false);
  CHECK(r.elapsed_ms == doctest::Approx(4 * (1.5 + 2.0 * 9)));
  const auto slow = evaluate(udf, batch_of(0, 4, 9), nullptr, false, 1.5);
  CHECK(slow.elapsed_ms == doctest::Approx(1.5 * 4 * (1.5 + 2.0 * 9)));
}

TEST_CASE("range and attribute rules") {
  SyntheticUdf range(UdfSpec{"r", ConstantCost{1}, RangeRule{{{2, 4}, {8, 9}}}, {}});
  CHECK_FALSE(range.verdict(TupleRow{1, 0, {}}));
  CHECK(range.verdict(TupleRow{2, 0, {}}));
  CHECK(range.verdict(TupleRow{3, 0, {}}));
  CHECK_FALSE(range.verdict(TupleRow{4, 0, {}}));
  CHECK(range.verdict(TupleRow{8, 0, {}}));
  ql::Filter f;
  f.cmp = ql::Comparison{ql::AttributeRef{"rating"}, ql::CompareOp::Le, std::int64_t{1}};
  SyntheticUdf rule(UdfSpec{"a", ConstantCost{1}, AttributeRule{f}, {}});
  TupleRow row;
  row.attributes["rating"] = std::int64_t{1};
  CHECK(rule.verdict(row));
  row.attributes["rating"] = std::int64_t{4};
  CHECK_FALSE(rule.verdict(row));
}

TEST_CASE("failing rows raise") {
  SyntheticUdf udf(UdfSpec{"u", ConstantCost{1}, SeededBernoulli{0.5, 1}, {5}});
  CHECK_NOTHROW(evaluate(udf, batch_of(0, 5), nullptr, false));
  CHECK_THROWS_AS(evaluate(udf, batch_of(0, 6), nullptr, false), UdfError);
}

TEST_CASE("cached rows cost nothing") {
  const auto dir = std::filesystem::temp_directory_path() / "aqp_udf_cache_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  VerdictCache cache(dir / "c.log");
  SyntheticUdf udf(UdfSpec{"u", ConstantCost{4}, SeededBernoulli{0.5, 7}, {}});
  const auto b = batch_of(100, 10);
  const auto first = evaluate(udf, b, &cache, true);
  CHECK(first.cache_hits == 0);
  CHECK(first.cache_writes.size() == 10);
  for (auto [id, v] : first.cache_writes) cache.put(CacheKey{VerdictCache::name_hash("u"), id}, v);
  const auto second = evaluate(udf, b, &cache, true);
  CHECK(second.cache_hits == 10);
  CHECK(second.elapsed_ms == 0.0);
  CHECK(second.cache_writes.empty());
  CHECK(second.verdicts == first.verdicts);
  std::filesystem::remove_all(dir);
}

TEST_CASE("property: verdicts do not depend on batch composition") {
  SyntheticUdf udf(UdfSpec{"u", ConstantCost{1}, SeededBernoulli{0.4, 21}, {}});
  std::vector<TupleRow> rows;
  for (TupleId id = 0; id < 500; ++id) rows.push_back(TupleRow{id, id % 7, {}});
  std::map<TupleId, bool> alone;
  for (const auto& r : rows) alone[r.tuple_id] = udf.evaluate_row(r).pass;
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(rows.begin(), rows.end(), rng);
    std::size_t i = 0;
    while (i < rows.size()) {
      RoutingBatch b;
      const std::size_t n = 1 + rng() % 40;
      for (std::size_t k = 0; k < n && i < rows.size(); ++k) b.rows.push_back(rows[i++]);
      const auto r = evaluate(udf, b, nullptr, false);
      for (std::size_t k = 0; k < b.rows.size(); ++k) CHECK(r.verdicts[k] == alone[b.rows[k].tuple_id]);
    }
  }
}
