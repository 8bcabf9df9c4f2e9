#include "aqp/harness/run.hpp"

#include <fstream>
#include <unordered_map>

#include "aqp/cache.hpp"
#include "aqp/errors.hpp"
#include "aqp/harness/dataset.hpp"
#include "aqp/udf.hpp"

namespace aqp::harness {

namespace fs = std::filesystem;

namespace {

fs::path resolve_cache_dir(const ExperimentConfig& cfg) {
  fs::path dir = *cfg.cache_dir;
  if (dir.is_relative() && cfg.output_dir) dir = *cfg.output_dir / dir;
  return dir;
}

}  // namespace

PreparedRun prepare(const ExperimentConfig& cfg) {
  PreparedRun p;
  p.rows = generate_dataset(cfg.dataset, cfg.seed);
  p.checksum = dataset_checksum(p.rows);

  std::set<std::string> known;
  std::map<std::string, PredicateSpec> registry;
  std::map<std::string, std::shared_ptr<const SyntheticUdf>> udfs;
  for (const auto& [name, u] : cfg.udfs) {
    known.insert(name);
    auto udf = std::make_shared<const SyntheticUdf>(u.spec);
    udfs[name] = udf;
    PredicateSpec s;
    s.name = name;
    s.udf = udf;
    s.pool = u.pool;
    s.cacheable = u.cacheable;
    s.cost_heuristic = u.heuristic;
    s.worker_memory = u.worker_memory;
    s.max_workers = u.max_workers;
    registry[name] = s;
  }
  p.plan = ql::plan(ql::parse(cfg.program, known), registry);

  auto id_of = [&](const std::string& name) -> std::optional<PredicateId> {
    for (const auto& s : p.plan.aqp) {
      if (s.name == name) return s.predicate_id;
    }
    return std::nullopt;
  };

  RunOptions& o = p.options;
  o.mode = cfg.mode;
  o.pipeline = cfg.pipeline;
  o.central = cfg.central;
  o.eddy.policy = cfg.eddy_policy;
  o.eddy.warmup_batches = cfg.warmup_batches;
  o.eddy.alpha = cfg.alpha;
  o.eddy.prior = cfg.prior;
  o.eddy.churn_every = cfg.churn_every;
  o.eddy.churn_seed = mix64(cfg.seed ^ 0xc4u);
  for (const auto& name : cfg.static_order) {
    auto id = id_of(name);
    if (!id) throw ConfigError("policies.static_order", "'" + name + "' is not in the AQP stage");
    o.eddy.static_order.push_back(*id);
  }
  o.laminar = cfg.laminar;
  o.devices = cfg.devices;
  o.failure = cfg.failure;
  o.watchdog_ms = cfg.watchdog_ms;
  o.wall_execution = cfg.execution;

  if (cfg.cache_dir) {
    const fs::path dir = resolve_cache_dir(cfg);
    fs::create_directories(dir);
    std::unordered_map<TupleId, const TupleRow*> by_id;
    for (const auto& r : p.rows) by_id[r.tuple_id] = &r;
    for (const auto& spec : p.plan.aqp) {
      bool preloaded = false;
      for (const auto& pl : cfg.preloads) preloaded = preloaded || pl.udf == spec.name;
      if (!spec.cacheable && !preloaded) continue;
      const fs::path file = dir / (cfg.dataset.name + "__" + spec.name + ".log");
      if (cfg.cache_fresh) fs::remove(file);
      auto cache = std::make_shared<VerdictCache>(file);
      if (cfg.cache_fresh || cache->size() == 0) {
        const auto& udf = udfs.at(spec.name);
        for (const auto& pl : cfg.preloads) {
          if (pl.udf != spec.name) continue;
          const TupleRange range = TupleRange::open(pl.gt, pl.lt);
          cache->preload(std::span<const TupleRange>(&range, 1), spec.name, [&](TupleId id) {
            auto it = by_id.find(id);
            if (it != by_id.end()) return udf->verdict(*it->second);
            TupleRow bare;
            bare.tuple_id = id;
            return udf->verdict(bare);
          });
        }
      }
      o.caches[spec.predicate_id] = std::move(cache);
    }
  }
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  PreparedRun p = prepare(cfg);
  ExperimentResult r;
  r.result = run_query(p.plan, p.rows, p.options);
  r.report = build_report(r.result.events, cfg.utilization_window_ms);
  r.report.dataset_checksum = p.checksum;
  if (cfg.output_dir) {
    const fs::path dir = *cfg.output_dir;
    fs::create_directories(dir);
    {
      std::ofstream os(dir / "events.jsonl");
      for (const auto& e : r.result.events) os << to_json(e).dump() << '\n';
    }
    {
      nlohmann::json j = to_json(r.report);
      j["config"] = to_json(cfg);
      std::ofstream os(dir / "report.json");
      os << j.dump(2) << '\n';
    }
    write_report_csvs(r.report, dir);
  }
  return r;
}

}  // namespace aqp::harness
