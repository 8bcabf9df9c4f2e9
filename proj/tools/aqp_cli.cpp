// Command-line driver: run, bench, report, oracle.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <iostream>
#include <sstream>

#include "aqp/errors.hpp"
#include "aqp/harness/bench.hpp"
#include "aqp/harness/config.hpp"
#include "aqp/harness/report.hpp"
#include "aqp/harness/run.hpp"
#include "aqp/oracle.hpp"

namespace fs = std::filesystem;
using namespace aqp;
using namespace aqp::harness;

namespace {

ExperimentConfig load(const std::string& ref, const std::vector<std::string>& sets, const std::string& out) {
  nlohmann::json j = load_config_json(ref);
  for (const auto& s : sets) apply_override(j, s);
  if (!out.empty()) j["output_dir"] = out;
  return parse_config(j);
}

std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> v;
  for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(std::round(x * 1000.0) / 1000.0);
  return v;
}

int oracle_fig5(std::size_t n) {
  // Selectivity-first runs the cost-2 predicate first; one item passes it.
  // Cost-first runs the cost-1 predicate first; six of ten items pass it.
  const std::size_t k_cost = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(n)));
  const std::size_t k_sel = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));
  double cmin = 1e300, cmax = 0, smin = 1e300, smax = 0;
  const auto cmasks = oracle::masks_with(n, k_cost);
  for (const auto& m : cmasks) {
    const double t = oracle::completion_time({n, 1.0, 2.0, m});
    cmin = std::min(cmin, t);
    cmax = std::max(cmax, t);
  }
  const auto smasks = oracle::masks_with(n, k_sel);
  for (const auto& m : smasks) {
    const double t = oracle::completion_time({n, 2.0, 1.0, m});
    smin = std::min(smin, t);
    smax = std::max(smax, t);
  }
  std::cout << "order,masks,min,max\n";
  std::cout << "cost-first," << cmasks.size() << ',' << cmin << ',' << cmax << '\n';
  std::cout << "selectivity-first," << smasks.size() << ',' << smin << ',' << smax << '\n';
  if (n == 10) {
    const double w = oracle::completion_time({10, 1.0, 2.0, oracle::mask_from_positions(10, {2, 4, 6, 8, 9, 10})});
    std::cout << "witness{2;4;6;8;9;10},1," << w << ',' << w << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive UDF query pipeline driver"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  std::string out;

  auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  run->add_option("config", config, "Config file or preset:<name>")->required();
  run->add_option("--set", sets, "Override, e.g. queues.batch_rows=20");
  run->add_option("--out", out, "Artifact directory");

  std::string variants = "cost";
  std::size_t reps = 5;
  auto* bench = app.add_subcommand("bench", "Compare variants on identical data");
  bench->add_option("config", config, "Config file or preset:<name>")->required();
  bench->add_option("--variants", variants, "Comma-separated variants; tokens joined by '+'");
  bench->add_option("--reps", reps, "Repetitions per variant (median is reported)");
  bench->add_option("--set", sets, "Override, e.g. dataset.rows=500");
  bench->add_option("--out", out, "Artifact directory");

  std::string log;
  double window = 1000.0;
  auto* report = app.add_subcommand("report", "Derive CSVs from an event log");
  report->add_option("log", log, "events.jsonl")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "Output directory (default: next to the log)");
  report->add_option("--window", window, "Utilization window in ms");

  std::string which;
  std::size_t n = 0;
  std::size_t limit = 2000;
  bool engine = false;
  auto* orc = app.add_subcommand("oracle", "Schedule-model tables");
  orc->add_option("which", which, "fig5 or fig7")->required()->check(CLI::IsMember({"fig5", "fig7"}));
  orc->add_option("--n", n, "Item count (fig5: 10, fig7: 20; engine grid: 2000)");
  orc->add_option("--limit", limit, "Masks sampled per cell when enumeration is too large");
  orc->add_flag("--engine", engine, "fig7: measure the grid with the virtual-time engine instead");
  orc->add_option("--set", sets, "Engine grid: override on the fig7 preset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const ExperimentConfig cfg = load(config, sets, out.empty() ? "" : out);
      ExperimentConfig c = cfg;
      if (!c.output_dir) c.output_dir = fs::path("aqp-out") / c.name;
      const auto res = run_experiment(c);
      nlohmann::json summary = {{"name", c.name},
                                {"total_ms", res.report.total_ms},
                                {"output_rows", res.report.output_rows},
                                {"batches", res.report.batches},
                                {"dataset_checksum", res.report.dataset_checksum},
                                {"artifacts", c.output_dir->string()}};
      std::cout << summary.dump(2) << '\n';
    } else if (*bench) {
      const ExperimentConfig cfg = load(config, sets, out);
      std::vector<std::string> vs;
      std::stringstream ss(variants);
      for (std::string v; std::getline(ss, v, ',');) {
        if (!v.empty()) vs.push_back(v);
      }
      const auto rows = run_bench(cfg, vs, reps);
      write_bench_csv(std::cout, rows);
      if (cfg.output_dir) {
        fs::create_directories(*cfg.output_dir);
        std::ofstream os(*cfg.output_dir / "bench.json");
        os << to_json(rows).dump(2) << '\n';
      }
    } else if (*report) {
      const fs::path dir = out.empty() ? fs::path(log).parent_path() : fs::path(out);
      const auto r = cli_report(log, dir.empty() ? fs::path(".") : dir, window);
      if (r.skipped_lines > 0) std::cerr << "warning: skipped " << r.skipped_lines << " corrupt line(s)\n";
      std::cout << "total_ms " << r.total_ms << "\noutput_rows " << r.output_rows << '\n';
    } else if (*orc) {
      if (which == "fig5") return oracle_fig5(n == 0 ? 10 : n);
      const auto sel_a = steps(0.1, 0.9, 0.1);
      const std::vector<double> sel_b = {0.1, 0.5, 0.9};
      if (engine) {
        nlohmann::json base = preset_json("fig7");
        if (n != 0) base["dataset"]["rows"] = n;
        for (const auto& s : sets) apply_override(base, s);
        write_engine_grid_csv(std::cout, engine_fig7_grid(base, sel_a, sel_b));
      } else {
        oracle::write_grid_csv(std::cout, oracle::policy_dominates(10.0, 20.0, sel_a, sel_b, n == 0 ? 20 : n, limit));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const WatchdogAbort& e) {
    std::cerr << "watchdog abort: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
