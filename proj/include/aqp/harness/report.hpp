#pragma once

// Everything here is computed from the event log alone.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqp/event_log.hpp"
#include "aqp/simdev.hpp"

namespace aqp::harness {

struct ActivationPoint {
  double ts = 0.0;
  PredicateId predicate_id = 0;
  WorkerId worker_id = 0;
  DeviceId device_id = 0;
  double resident_memory = 0.0;
};

// Policy key of each unvisited predicate at a batch's first routing step,
// keyed by the batch's first tuple id.
struct CostPoint {
  TupleId first_tuple = 0;
  PredicateId predicate_id = 0;
  double key = 0.0;  // +inf when the log carries null
};

struct WorkerBusy {
  PredicateId predicate_id = 0;
  WorkerId worker_id = 0;
  DeviceId device_id = 0;
  double busy_ms = 0.0;
  std::size_t batches = 0;
  std::size_t rows = 0;
};

struct StatsPoint {
  double ts = 0.0;
  PredicateId predicate_id = 0;
  std::optional<double> cost;
  double selectivity = 0.0;
  double hit_rate = 0.0;
};

struct QueryReport {
  double total_ms = 0.0;
  std::size_t output_rows = 0;
  std::size_t batches = 0;
  std::size_t dropped_batches = 0;
  std::string dataset_checksum;  // filled by the driver; not part of the log
  // First predicate of each batch: over steady-phase decisions and over all.
  std::map<PredicateId, std::size_t> first_route_steady;
  std::map<PredicateId, std::size_t> first_route_all;
  std::vector<ActivationPoint> activations;
  std::vector<UtilizationRow> utilization;
  std::vector<CostPoint> cost_series;
  std::vector<StatsPoint> stats_series;
  std::vector<WorkerBusy> worker_busy;
  std::size_t rejected_inserts = 0;
  std::size_t skipped_lines = 0;
};

// stats_samples bounds the stats time series (evenly spaced dispatches).
QueryReport build_report(const std::vector<Event>& events, double utilization_window_ms = 1000.0,
                         std::size_t stats_samples = 200);

nlohmann::json to_json(const QueryReport& r);

// Writes utilization.csv, cost_series.csv, worker_busy.csv, activation.csv.
void write_report_csvs(const QueryReport& r, const std::filesystem::path& dir);

// Reads a JSON-lines log (skipping corrupt lines), writes the CSVs and
// report.json into out_dir.
QueryReport cli_report(const std::filesystem::path& log, const std::filesystem::path& out_dir,
                       double utilization_window_ms = 1000.0);

}  // namespace aqp::harness
