#include "aqp/harness/dataset.hpp"

#include <cstdio>
#include <random>

#include "aqp/errors.hpp"
#include "aqp/udf.hpp"

namespace aqp::harness {

namespace {

std::uint64_t fnv_str(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv_u64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Generator {
 public:
  Generator(const ValueGen& g, std::uint64_t seed) : g_(g), rng_(seed) {}

  Scalar next(std::size_t index) {
    switch (g_.kind) {
      case ValueGen::Kind::Constant:
        return g_.values.empty() ? Scalar{std::int64_t{0}} : g_.values.front();
      case ValueGen::Kind::UniformInt:
        return std::uniform_int_distribution<std::int64_t>(g_.lo, g_.hi)(rng_);
      case ValueGen::Kind::Choice:
        return g_.values[std::uniform_int_distribution<std::size_t>(0, g_.values.size() - 1)(rng_)];
      case ValueGen::Kind::Cycle:
        return g_.values[index % g_.values.size()];
    }
    return std::int64_t{0};
  }

 private:
  const ValueGen& g_;
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<TupleRow> generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  const std::uint64_t base = mix64(seed ^ fnv_str(0xcbf29ce484222325ULL, spec.name));
  Generator payload(spec.payload, mix64(base ^ 0x70));
  std::vector<std::pair<std::string, Generator>> attrs;
  for (const auto& [name, g] : spec.attributes) {
    attrs.emplace_back(name, Generator(g, mix64(base ^ fnv_str(0xcbf29ce484222325ULL, name))));
  }
  std::vector<TupleRow> rows;
  rows.reserve(spec.rows);
  for (std::size_t i = 0; i < spec.rows; ++i) {
    TupleRow r;
    r.tuple_id = spec.first_id + i;
    const Scalar p = payload.next(i);
    if (const auto* v = std::get_if<std::int64_t>(&p); v && *v >= 0) {
      r.payload_size = static_cast<std::uint64_t>(*v);
    } else {
      throw ConfigError("dataset.payload", "payload sizes must be non-negative integers");
    }
    for (auto& [name, g] : attrs) r.attributes[name] = g.next(i);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string dataset_checksum(const std::vector<TupleRow>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& r : rows) {
    h = fnv_u64(h, r.tuple_id);
    h = fnv_u64(h, r.payload_size);
    for (const auto& [k, v] : r.attributes) {
      h = fnv_str(h, k);
      h = fnv_u64(h, v.index());
      h = fnv_str(h, aqp::to_string(v));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace aqp::harness
