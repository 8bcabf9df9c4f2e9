#include "aqp/udf.hpp"

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"

namespace aqp {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_draw(std::uint64_t seed, TupleId tuple_id) {
  return static_cast<double>(mix64(seed ^ tuple_id) >> 11) * 0x1.0p-53;
}

SyntheticUdf::SyntheticUdf(UdfSpec spec) : spec_(std::move(spec)) {}

bool SyntheticUdf::verdict(const TupleRow& row) const {
  struct Visitor {
    const TupleRow& row;
    bool operator()(const SeededBernoulli& b) const { return unit_draw(b.seed, row.tuple_id) < b.p; }
    bool operator()(const AttributeRule& a) const { return ql::eval_simple(a.rule, row); }
    bool operator()(const RangeRule& r) const {
      for (const auto& range : r.pass) {
        if (range.contains(row.tuple_id)) return true;
      }
      return false;
    }
  };
  return std::visit(Visitor{row}, spec_.decision);
}

double SyntheticUdf::cost_ms(const TupleRow& row) const {
  if (const auto* c = std::get_if<ConstantCost>(&spec_.cost)) return c->ms_per_tuple;
  const auto& s = std::get<SizeLinearCost>(spec_.cost);
  return s.base_ms + s.ms_per_unit * static_cast<double>(row.payload_size);
}

RowOutcome SyntheticUdf::evaluate_row(const TupleRow& row) const {
  if (spec_.fail_on.contains(row.tuple_id)) {
    throw UdfError(spec_.name + ": evaluation failed on tuple " + std::to_string(row.tuple_id));
  }
  return {verdict(row), cost_ms(row)};
}

EvalResult evaluate(const Udf& udf, const RoutingBatch& batch, const VerdictCache* cache,
                    bool cacheable, double speed_factor) {
  EvalResult r;
  r.survivors.batch_id = batch.batch_id;
  r.survivors.created_at = batch.created_at;
  r.verdicts.reserve(batch.rows.size());
  const std::uint64_t key_hash = cache ? VerdictCache::name_hash(udf.name()) : 0;
  double compute_ms = 0.0;
  for (const auto& row : batch.rows) {
    bool pass = false;
    std::optional<bool> hit;
    if (cache) hit = cache->get(CacheKey{key_hash, row.tuple_id});
    if (hit) {
      pass = *hit;
      ++r.cache_hits;
    } else {
      RowOutcome o = udf.evaluate_row(row);
      pass = o.pass;
      compute_ms += o.cost_ms;
      if (cacheable) r.cache_writes.emplace_back(row.tuple_id, pass);
    }
    r.verdicts.push_back(pass);
    if (pass) r.survivors.rows.push_back(row);
  }
  r.elapsed_ms = compute_ms * speed_factor;
  return r;
}

}  // namespace aqp
