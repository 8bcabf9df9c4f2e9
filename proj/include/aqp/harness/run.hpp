#pragma once

#include <string>
#include <vector>

#include "aqp/harness/config.hpp"
#include "aqp/harness/report.hpp"
#include "aqp/pipeline.hpp"
#include "aqp/querylang.hpp"

namespace aqp::harness {

struct PreparedRun {
  ql::PhysicalPlan plan;
  std::vector<TupleRow> rows;
  RunOptions options;
  std::string checksum;
};

// Builds the dataset, plan, options and (re)seeded caches. Throws ConfigError.
PreparedRun prepare(const ExperimentConfig& cfg);

struct ExperimentResult {
  RunResult result;
  QueryReport report;
};

// Runs one experiment; writes events.jsonl, report.json and the CSVs when
// cfg.output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace aqp::harness
