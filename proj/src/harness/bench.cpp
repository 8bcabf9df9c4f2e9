#include "aqp/harness/bench.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "aqp/errors.hpp"
#include "aqp/harness/dataset.hpp"
#include "aqp/harness/run.hpp"
#include "aqp/udf.hpp"

namespace aqp::harness {

using nlohmann::json;

namespace {

std::vector<std::string> udf_filter_names(const ExperimentConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& f : ql::parse(cfg.program).filters) {
    if (auto n = f.udf_name()) names.push_back(*n);
  }
  return names;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

}  // namespace

std::vector<std::string> best_static_order(const ExperimentConfig& cfg) {
  const auto rows = generate_dataset(cfg.dataset, cfg.seed);
  std::vector<std::pair<double, std::string>> keyed;
  for (const auto& name : udf_filter_names(cfg)) {
    const SyntheticUdf udf(cfg.udfs.at(name).spec);
    double cost = 0.0;
    std::size_t passed = 0;
    for (const auto& r : rows) {
      cost += udf.cost_ms(r);
      passed += udf.verdict(r) ? 1 : 0;
    }
    const double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
    keyed.emplace_back(score(cost / n, static_cast<double>(passed) / n), name);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> order;
  for (auto& [_, n] : keyed) order.push_back(n);
  return order;
}

ExperimentConfig apply_variant(ExperimentConfig cfg, const std::string& variant) {
  const auto tokens = split(variant, '+');
  if (tokens.empty()) throw ConfigError("variants", "empty variant");
  for (const auto& t : tokens) {
    if (t == "no-reordering") {
      cfg.static_order = udf_filter_names(cfg);
    } else if (t == "best-reordering") {
      cfg.static_order = best_static_order(cfg);
    } else if (auto p = parse_policy(t)) {
      cfg.eddy_policy = *p;
      cfg.static_order.clear();
    } else if (t == "laminar-rr") {
      cfg.laminar.policy = LaminarPolicy::RoundRobin;
    } else if (t == "laminar-data-aware") {
      cfg.laminar.policy = LaminarPolicy::DataAware;
    } else if (t == "alternate") {
      cfg.laminar.alternate_devices = true;
    } else if (t == "no-alternate") {
      cfg.laminar.alternate_devices = false;
    } else {
      throw ConfigError("variants", "unknown variant token '" + t + "'");
    }
  }
  return cfg;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg, const std::vector<std::string>& variants,
                                std::size_t reps) {
  if (variants.empty()) throw ConfigError("variants", "at least one variant is required");
  if (reps == 0) throw ConfigError("reps", "must be >= 1");
  std::vector<ExperimentConfig> configs;
  for (const auto& v : variants) configs.push_back(apply_variant(cfg, v));
  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    BenchRow row;
    row.variant = variants[i];
    ExperimentConfig c = configs[i];
    for (std::size_t r = 0; r < reps; ++r) {
      c.output_dir.reset();
      if (cfg.output_dir && r + 1 == reps) c.output_dir = *cfg.output_dir / variants[i];
      ExperimentResult res = run_experiment(c);
      row.totals_ms.push_back(res.result.total_ms);
      row.dataset_checksum = res.report.dataset_checksum;
      row.output_rows = res.result.output.size();
    }
    row.median_ms = median(row.totals_ms);
    rows.push_back(std::move(row));
  }
  for (auto& r : rows) r.speedup = r.median_ms > 0.0 ? rows.front().median_ms / r.median_ms : 1.0;
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "variant,median_ms,speedup,reps,output_rows,dataset_checksum\n";
  for (const auto& r : rows) {
    os << r.variant << ',' << r.median_ms << ',' << r.speedup << ',' << r.totals_ms.size() << ',' << r.output_rows
       << ',' << r.dataset_checksum << '\n';
  }
}

json to_json(const std::vector<BenchRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"variant", r.variant},
                   {"totals_ms", r.totals_ms},
                   {"median_ms", r.median_ms},
                   {"speedup", r.speedup},
                   {"output_rows", r.output_rows},
                   {"dataset_checksum", r.dataset_checksum}});
  }
  return arr;
}

std::vector<EngineGridCell> engine_fig7_grid(const json& base, const std::vector<double>& sel_a,
                                             const std::vector<double>& sel_b) {
  std::vector<EngineGridCell> grid;
  for (double sb : sel_b) {
    for (double sa : sel_a) {
      json j = base;
      j["udfs"]["a"]["decision"]["p"] = sa;
      j["udfs"]["b"]["decision"]["p"] = sb;
      j.erase("output_dir");
      const ExperimentConfig cfg = parse_config(j);
      EngineGridCell cell;
      cell.sel_a = sa;
      cell.sel_b = sb;
      cell.cost_ms = run_experiment(apply_variant(cfg, "cost")).result.total_ms;
      cell.selectivity_ms = run_experiment(apply_variant(cfg, "selectivity")).result.total_ms;
      cell.score_ms = run_experiment(apply_variant(cfg, "score")).result.total_ms;
      grid.push_back(cell);
    }
  }
  return grid;
}

void write_engine_grid_csv(std::ostream& os, const std::vector<EngineGridCell>& grid) {
  os << "sel_a,sel_b,cost_ms,selectivity_ms,score_ms,speedup_vs_selectivity,speedup_vs_score\n";
  for (const auto& c : grid) {
    os << c.sel_a << ',' << c.sel_b << ',' << c.cost_ms << ',' << c.selectivity_ms << ',' << c.score_ms << ','
       << c.selectivity_ms / c.cost_ms << ',' << c.score_ms / c.cost_ms << '\n';
  }
}

}  // namespace aqp::harness
