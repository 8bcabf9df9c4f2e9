#include "aqp/errors.hpp"
#include "aqp/harness/config.hpp"

namespace aqp::harness {

using nlohmann::json;

namespace {

json constant_cost(double ms) { return {{"kind", "constant"}, {"ms", ms}}; }
json bernoulli(double p) { return {{"kind", "bernoulli"}, {"p", p}}; }

// Ten items, one routing batch per item. color (cost 1) passes six items in
// the arrangement that yields 14 ticks; breed (cost 2) passes one.
json fig5() {
  return {
      {"name", "fig5"},
      {"mode", "virtual"},
      {"seed", 1},
      {"dataset", {{"name", "pets"}, {"rows", 10}, {"first_id", 1}}},
      {"program", "scan pets | filter udf(breed) == 1 | filter udf(color) == 1"},
      {"udfs",
       {{"breed",
         {{"cost", constant_cost(2)},
          {"decision", {{"kind", "range"}, {"pass", json::array({json::array({3, 4})})}}},
          {"max_workers", 1}}},
        {"color",
         {{"cost", constant_cost(1)},
          {"decision",
           {{"kind", "range"},
            {"pass", json::array({json::array({2, 3}), json::array({4, 5}), json::array({6, 7}),
                                  json::array({8, 11})})}}},
          {"max_workers", 1}}}}},
      {"policies", {{"eddy", "cost"}, {"static_order", json::array({"color", "breed"})}}},
      {"queues", {{"batch_rows", 1}}},
      {"laminar", {{"startup_ms", 0}}},
  };
}

json fig7() {
  return {
      {"name", "fig7"},
      {"mode", "virtual"},
      {"seed", 7},
      {"dataset", {{"name", "synthetic"}, {"rows", 2000}}},
      {"program", "scan synthetic | filter udf(a) == 1 | filter udf(b) == 1"},
      {"udfs",
       {{"a", {{"cost", constant_cost(10)}, {"decision", bernoulli(0.5)}, {"max_workers", 1}}},
        {"b", {{"cost", constant_cost(20)}, {"decision", bernoulli(0.5)}, {"max_workers", 1}}}}},
      {"policies", {{"eddy", "cost"}}},
      {"laminar", {{"startup_ms", 0}}},
  };
}

// Two image predicates with the measured statistics of the animal query.
json uc1() {
  return {
      {"name", "uc1"},
      {"mode", "virtual"},
      {"seed", 11},
      {"dataset", {{"name", "pets"}, {"rows", 3000}}},
      {"program", "scan pets | filter udf(breed) == 1 | filter udf(color) == 1"},
      {"udfs",
       {{"breed", {{"cost", constant_cost(28.315)}, {"decision", bernoulli(0.227)}, {"max_workers", 1}}},
        {"color", {{"cost", constant_cost(1.974)}, {"decision", bernoulli(0.056)}, {"max_workers", 1}}}}},
      {"policies", {{"eddy", "cost"}}},
      {"laminar", {{"startup_ms", 0}}},
  };
}

// Video frames where earlier queries left verdicts for det on one id range
// and for hat on another.
json uc2_cache() {
  return {
      {"name", "uc2-cache"},
      {"mode", "virtual"},
      {"seed", 21},
      {"dataset", {{"name", "frames"}, {"rows", 15000}}},
      {"program", "scan frames | filter udf(det) == 1 | filter udf(hat) == 1"},
      {"udfs",
       {{"det",
         {{"cost", constant_cost(10)}, {"decision", bernoulli(0.1)}, {"cacheable", true}, {"max_workers", 1}}},
        {"hat",
         {{"cost", constant_cost(12)}, {"decision", bernoulli(0.1)}, {"cacheable", true}, {"max_workers", 1}}}}},
      {"policies", {{"eddy", "reuse-aware"}}},
      {"laminar", {{"startup_ms", 0}}},
      {"cache",
       {{"dir", "aqp-cache"},
        {"fresh", true},
        {"preload", json::array({{{"udf", "det"}, {"gt", 1000}, {"lt", 7000}},
                                 {{"udf", "hat"}, {"gt", 8000}, {"lt", 14000}}})}}},
  };
}

// One GPU-bound predicate; memory decides how many contexts run.
json uc3_scale() {
  return {
      {"name", "uc3-scale"},
      {"mode", "virtual"},
      {"seed", 31},
      {"dataset", {{"name", "images"}, {"rows", 4000}}},
      {"program", "scan images | filter udf(detect) == 1"},
      {"udfs",
       {{"detect",
         {{"cost", constant_cost(10)}, {"decision", bernoulli(0.3)}, {"pool", "gpu"}, {"worker_memory", 6}}}}},
      {"devices", json::array({{{"id", 0}, {"pool", "gpu"}, {"total_mem", 48}, {"speed", 1.0}},
                               {{"id", 1}, {"pool", "gpu"}, {"total_mem", 48}, {"speed", 1.0}}})},
      {"policies", {{"eddy", "cost"}, {"laminar", "rr"}, {"alternate_devices", true}}},
      {"laminar", {{"startup_ms", 200}}},
  };
}

// Payload sizes alternate 9, 1, 9, 1 so that round-robin hands every large
// item to the same worker.
json uc4_balance() {
  return {
      {"name", "uc4-balance"},
      {"mode", "virtual"},
      {"seed", 41},
      {"dataset",
       {{"name", "texts"}, {"rows", 400}, {"payload", {{"kind", "cycle"}, {"values", json::array({9, 1})}}}}},
      {"program", "scan texts | filter udf(sentiment) == 1"},
      {"udfs",
       {{"sentiment",
         {{"cost", {{"kind", "size_linear"}, {"ms_per_unit", 10}, {"base_ms", 0}}},
          {"decision", bernoulli(0.5)},
          {"heuristic", "payload_size"},
          {"worker_memory", 16}}}}},
      {"devices", json::array({{{"id", 0}, {"pool", "cpu"}, {"total_mem", 32}, {"speed", 1.0}}})},
      {"policies", {{"eddy", "cost"}, {"laminar", "data-aware"}}},
      {"queues", {{"batch_rows", 1}}},
      {"laminar", {{"startup_ms", 0}}},
  };
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig5", "fig7", "uc1", "uc2-cache", "uc3-scale", "uc4-balance"};
}

json preset_json(const std::string& name) {
  if (name == "fig5") return fig5();
  if (name == "fig7") return fig7();
  if (name == "uc1") return uc1();
  if (name == "uc2-cache") return uc2_cache();
  if (name == "uc3-scale") return uc3_scale();
  if (name == "uc4-balance") return uc4_balance();
  throw ConfigError("<preset>", "unknown preset '" + name + "'");
}

}  // namespace aqp::harness
