#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "aqp/cache.hpp"
#include "aqp/udf.hpp"

using namespace aqp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

CacheKey key(std::string_view udf, TupleId id) { return CacheKey{VerdictCache::name_hash(udf), id}; }

}  // namespace

TEST_CASE("put then get") {
  TempDir d("aqp_cache_rt");
  VerdictCache c(d.path / "v.log");
  c.put(key("det", 5), true);
  c.put(key("det", 6), false);
  CHECK(c.get(key("det", 5)) == true);
  CHECK(c.get(key("det", 6)) == false);
  CHECK_FALSE(c.get(key("det", 7)));
  CHECK_FALSE(c.get(key("hat", 5)));
}

TEST_CASE("last write wins, also after reopening") {
  TempDir d("aqp_cache_lww");
  {
    VerdictCache c(d.path / "v.log");
    c.put(key("det", 5), true);
    c.put(key("det", 5), false);
    CHECK(c.get(key("det", 5)) == false);
    c.flush();
  }
  VerdictCache c(d.path / "v.log");
  CHECK(c.get(key("det", 5)) == false);
  CHECK(c.size() == 1);
}

TEST_CASE("payloads round-trip") {
  TempDir d("aqp_cache_payload");
  const std::vector<std::uint8_t> bytes = {1, 2, 3, 250};
  {
    VerdictCache c(d.path / "v.log");
    c.put(key("det", 1), true, bytes);
    c.flush();
  }
  VerdictCache c(d.path / "v.log");
  CHECK(c.get_payload(key("det", 1)) == bytes);
  CHECK(c.get(key("det", 1)) == true);
}

TEST_CASE("truncation at every byte offset keeps every complete record") {
  TempDir d("aqp_cache_trunc");
  const fs::path full = d.path / "full.log";
  std::vector<std::pair<TupleId, bool>> written;
  {
    VerdictCache c(full);
    std::mt19937_64 rng(5);
    for (TupleId id = 0; id < 100; ++id) {
      const bool v = rng() % 2;
      c.put(key("det", id), v);
      written.emplace_back(id, v);
    }
    c.flush();
  }
  std::ifstream in(full, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 100 * kCacheRecordHeader);
  for (std::size_t cut = 0; cut <= bytes.size(); ++cut) {
    const fs::path p = d.path / "cut.log";
    {
      std::ofstream out(p, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(cut));
    }
    const std::size_t complete = cut / kCacheRecordHeader;
    {
      VerdictCache c(p);
      REQUIRE(c.size() == complete);
      CHECK(c.recovered_truncation() == cut - complete * kCacheRecordHeader);
      for (std::size_t i = 0; i < complete; ++i) REQUIRE(c.get(key("det", written[i].first)) == written[i].second);
      if (complete < 100) CHECK_FALSE(c.get(key("det", written[complete].first)));
      // Appending after recovery must not glue onto the torn tail.
      c.put(key("det", 1000), true);
      c.flush();
    }
    VerdictCache again(p);
    CHECK(again.size() == complete + 1);
    CHECK(again.get(key("det", 1000)) == true);
    CHECK(again.recovered_truncation() == 0);
  }
}

TEST_CASE("probe hit rate") {
  TempDir d("aqp_cache_probe");
  VerdictCache c(d.path / "v.log");
  RoutingBatch b;
  for (TupleId id = 0; id < 10; ++id) b.rows.push_back(TupleRow{id, 0, {}});
  CHECK(c.probe_hit_rate(b, "det") == 0.0);
  for (TupleId id = 0; id < 7; ++id) c.put(key("det", id), true);
  CHECK(c.probe_hit_rate(b, "det") == doctest::Approx(0.7));
  CHECK(c.probe_hit_rate(RoutingBatch{}, "det") == 0.0);
}

TEST_CASE("preload ranges") {
  TempDir d("aqp_cache_preload");
  VerdictCache det(d.path / "det.log");
  VerdictCache hat(d.path / "hat.log");
  const TupleRange r1 = TupleRange::open(1000, 7000);
  const TupleRange r2 = TupleRange::open(8000, 14000);
  CHECK(det.preload(std::span(&r1, 1), "det", [](TupleId id) { return id % 3 == 0; }) == 5999);
  CHECK(hat.preload(std::span(&r2, 1), "hat", [](TupleId) { return true; }) == 5999);
  const TupleRange empty{5, 5};
  CHECK(det.preload(std::span(&empty, 1), "det", [](TupleId) { return true; }) == 0);
  RoutingBatch in_r1;
  for (TupleId id = 1001; id < 1011; ++id) in_r1.rows.push_back(TupleRow{id, 0, {}});
  CHECK(det.probe_hit_rate(in_r1, "det") == 1.0);
  CHECK(hat.probe_hit_rate(in_r1, "hat") == 0.0);
  CHECK(det.get(key("det", 1002)) == true);
  CHECK(det.get(key("det", 1003)) == false);
  CHECK_FALSE(det.get(key("det", 1000)));
  CHECK_FALSE(det.get(key("det", 7000)));
}

TEST_CASE("property: probe matches the hit count of the following evaluation") {
  TempDir d("aqp_cache_probe_eval");
  VerdictCache c(d.path / "v.log");
  SyntheticUdf udf(UdfSpec{"det", ConstantCost{1}, SeededBernoulli{0.5, 3}, {}});
  std::mt19937_64 rng(17);
  for (TupleId id = 0; id < 5000; ++id) {
    if (rng() % 3 == 0) c.put(key("det", id), rng() % 2);
  }
  for (int i = 0; i < 1000; ++i) {
    RoutingBatch b;
    const std::size_t n = rng() % 20;
    for (std::size_t k = 0; k < n; ++k) b.rows.push_back(TupleRow{rng() % 5000, 0, {}});
    const double probe = c.probe_hit_rate(b, "det");
    const auto r = evaluate(udf, b, &c, false);
    const double seen = b.rows.empty() ? 0.0 : static_cast<double>(r.cache_hits) / static_cast<double>(b.rows.size());
    REQUIRE(probe == seen);
  }
}
