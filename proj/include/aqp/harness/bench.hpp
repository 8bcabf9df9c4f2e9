#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqp/harness/config.hpp"

namespace aqp::harness {

// Variant tokens joined with '+', e.g. "cost+laminar-data-aware":
//   no-reordering, best-reordering, cost, score, selectivity, reuse-aware,
//   laminar-rr, laminar-data-aware, alternate, no-alternate.
ExperimentConfig apply_variant(ExperimentConfig cfg, const std::string& variant);

// Textual order sorted by score using the configured ground truth: mean cost
// over the dataset and the exact pass fraction of each udf.
std::vector<std::string> best_static_order(const ExperimentConfig& cfg);

struct BenchRow {
  std::string variant;
  std::vector<double> totals_ms;
  double median_ms = 0.0;
  double speedup = 1.0;  // first variant's median / this median
  std::string dataset_checksum;
  std::size_t output_rows = 0;
};

// Runs variants sequentially with identical data and seed.
std::vector<BenchRow> run_bench(const ExperimentConfig& cfg, const std::vector<std::string>& variants,
                                std::size_t reps = 5);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);
nlohmann::json to_json(const std::vector<BenchRow>& rows);

double median(std::vector<double> v);

// Engine-measured version of the selectivity grid: speedup of cost-driven
// over selectivity-driven and score-driven routing per (sel_a, sel_b) cell.
struct EngineGridCell {
  double sel_a = 0.0;
  double sel_b = 0.0;
  double cost_ms = 0.0;
  double selectivity_ms = 0.0;
  double score_ms = 0.0;
};

std::vector<EngineGridCell> engine_fig7_grid(const nlohmann::json& base, const std::vector<double>& sel_a,
                                             const std::vector<double>& sel_b);

void write_engine_grid_csv(std::ostream& os, const std::vector<EngineGridCell>& grid);

}  // namespace aqp::harness
