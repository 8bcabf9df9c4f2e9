#pragma once

// Experiment configuration. The file format is JSON; every validation error
// carries the dotted path of the offending field.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqp/pipeline.hpp"
#include "aqp/simdev.hpp"
#include "aqp/udf.hpp"

namespace aqp::harness {

// How one attribute or the payload size is generated per row.
struct ValueGen {
  enum class Kind { Constant, UniformInt, Choice, Cycle };
  Kind kind = Kind::Constant;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::vector<Scalar> values;  // Constant (one value), Choice, Cycle
};

struct DatasetSpec {
  std::string name = "synthetic";
  std::size_t rows = 1000;
  TupleId first_id = 0;
  ValueGen payload;  // integer valued
  std::map<std::string, ValueGen> attributes;
};

struct UdfConfig {
  UdfSpec spec;
  std::string pool = "cpu";
  bool cacheable = false;
  CostHeuristic heuristic = CostHeuristic::Constant;
  double worker_memory = 0.0;
  std::optional<std::size_t> max_workers;
};

struct CachePreload {
  std::string udf;
  TupleId gt = 0;  // exclusive bounds: gt < id < lt
  TupleId lt = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  RunMode mode = RunMode::Virtual;
  std::uint64_t seed = 1;
  DatasetSpec dataset;
  std::string program;
  std::map<std::string, UdfConfig> udfs;
  std::vector<DeviceSpec> devices;
  RoutingPolicyKind eddy_policy = RoutingPolicyKind::CostDriven;
  std::vector<std::string> static_order;  // udf names
  LaminarConfig laminar;
  CentralQueueConfig central;
  PipelineConfig pipeline;
  std::size_t warmup_batches = 1;
  double alpha = kDefaultCostAlpha;
  double prior = kDefaultSelectivityPrior;
  std::size_t churn_every = 0;
  std::optional<std::filesystem::path> cache_dir;
  bool cache_fresh = true;  // wipe and re-preload before each run
  std::vector<CachePreload> preloads;
  FailurePolicy failure = FailurePolicy::Abort;
  double watchdog_ms = 30000.0;
  double utilization_window_ms = kDefaultUtilizationWindowMs;
  ExecutionMode execution = ExecutionMode::Sleep;
  std::optional<std::filesystem::path> output_dir;
};

// Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

// "preset:<name>" or a path to a JSON file.
nlohmann::json load_config_json(const std::string& ref);
ExperimentConfig load_config(const std::string& ref);

// Applies "dotted.path=value" overrides to raw config JSON; value is parsed as
// JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::vector<std::string> preset_names();
nlohmann::json preset_json(const std::string& name);

}  // namespace aqp::harness
