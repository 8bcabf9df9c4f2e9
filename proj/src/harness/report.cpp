#include "aqp/harness/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <unordered_map>

#include "aqp/errors.hpp"

namespace aqp::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool steady_phase(const json& reason) {
  const auto it = reason.find("phase");
  return it != reason.end() && it->is_string() && (*it == "steady" || *it == "static");
}

double number_or_inf(const json& v) {
  return v.is_number() ? v.get<double>() : std::numeric_limits<double>::infinity();
}

}  // namespace

QueryReport build_report(const std::vector<Event>& events, double utilization_window_ms, std::size_t stats_samples) {
  QueryReport r;
  std::unordered_map<BatchId, TupleId> first_tuple;
  std::vector<BusyInterval> intervals;
  std::set<DeviceId> devices;
  std::map<std::pair<PredicateId, WorkerId>, WorkerBusy> busy;
  std::vector<const Event*> dispatches;
  double last_ts = 0.0;
  bool saw_eos = false;

  const json no_detail = json::object();
  for (const auto& e : events) {
    last_ts = std::max(last_ts, e.ts);
    const json& d = e.detail.is_object() ? e.detail : no_detail;
    switch (e.kind) {
      case EventKind::Pull:
        ++r.batches;
        if (e.batch_id && d.contains("first")) first_tuple[*e.batch_id] = d["first"].get<TupleId>();
        break;
      case EventKind::RejectInsert:
        ++r.rejected_inserts;
        break;
      case EventKind::Route: {
        if (!e.predicate_id || d.value("decision", "") != "dispatch") break;
        dispatches.push_back(&e);
        const json reason = d.value("reason", json::object());
        if (!reason.value("first", false)) break;
        ++r.first_route_all[*e.predicate_id];
        if (!steady_phase(reason)) break;
        ++r.first_route_steady[*e.predicate_id];
        const auto keys = reason.find("keys");
        if (keys == reason.end() || !keys->is_object() || !e.batch_id) break;
        const auto ft = first_tuple.find(*e.batch_id);
        if (ft == first_tuple.end()) break;
        for (auto it = keys->begin(); it != keys->end(); ++it) {
          r.cost_series.push_back(
              CostPoint{ft->second, static_cast<PredicateId>(std::stoul(it.key())), number_or_inf(it.value())});
        }
        break;
      }
      case EventKind::ActivateWorker:
        if (e.predicate_id && e.worker_id) {
          r.activations.push_back(ActivationPoint{e.ts, *e.predicate_id, *e.worker_id, e.device_id.value_or(0),
                                                  d.value("resident_memory", 0.0)});
        }
        if (e.device_id) devices.insert(*e.device_id);
        break;
      case EventKind::Evaluate: {
        const double start = d.value("start", e.ts);
        const DeviceId dev = e.device_id.value_or(0);
        devices.insert(dev);
        intervals.push_back(BusyInterval{dev, start, e.ts});
        if (e.predicate_id && e.worker_id) {
          auto& b = busy[{*e.predicate_id, *e.worker_id}];
          b.predicate_id = *e.predicate_id;
          b.worker_id = *e.worker_id;
          b.device_id = dev;
          b.busy_ms += e.ts - start;
          ++b.batches;
          b.rows += e.rows_in.value_or(0);
        }
        break;
      }
      case EventKind::Retire:
        if (d.value("dropped", false)) ++r.dropped_batches;
        break;
      case EventKind::Eos:
        saw_eos = true;
        r.total_ms = e.ts;
        r.output_rows = e.rows_out.value_or(0);
        break;
      case EventKind::Enqueue:
      case EventKind::Return:
        break;
    }
  }
  if (!saw_eos) r.total_ms = last_ts;

  if (!intervals.empty() && r.total_ms > 0.0) {
    r.utilization = utilization_series(intervals, std::vector<DeviceId>(devices.begin(), devices.end()), r.total_ms,
                                       utilization_window_ms);
  }
  for (auto& [_, b] : busy) r.worker_busy.push_back(b);

  if (!dispatches.empty() && stats_samples > 0) {
    const std::size_t n = dispatches.size();
    const std::size_t take = std::min(n, stats_samples);
    for (std::size_t i = 0; i < take; ++i) {
      const Event& e = *dispatches[take == 1 ? n - 1 : i * (n - 1) / (take - 1)];
      if (!e.detail.is_object()) continue;
      const auto st = e.detail.find("stats");
      if (st == e.detail.end() || !st->is_array()) continue;
      for (const auto& s : *st) {
        StatsPoint p;
        p.ts = e.ts;
        p.predicate_id = s.value("predicate_id", PredicateId{0});
        if (s.contains("cost") && s["cost"].is_number()) p.cost = s["cost"].get<double>();
        p.selectivity = s.value("selectivity", 0.0);
        p.hit_rate = s.value("hit_rate", 0.0);
        r.stats_series.push_back(p);
      }
    }
  }
  return r;
}

json to_json(const QueryReport& r) {
  json j;
  j["total_ms"] = r.total_ms;
  j["output_rows"] = r.output_rows;
  j["batches"] = r.batches;
  j["dropped_batches"] = r.dropped_batches;
  j["rejected_inserts"] = r.rejected_inserts;
  j["dataset_checksum"] = r.dataset_checksum;
  auto hist = [](const std::map<PredicateId, std::size_t>& m) {
    json h = json::object();
    for (const auto& [p, n] : m) h[std::to_string(p)] = n;
    return h;
  };
  j["first_route_steady"] = hist(r.first_route_steady);
  j["first_route_all"] = hist(r.first_route_all);
  json acts = json::array();
  for (const auto& a : r.activations) {
    acts.push_back({{"ts", a.ts},
                    {"predicate_id", a.predicate_id},
                    {"worker_id", a.worker_id},
                    {"device_id", a.device_id},
                    {"resident_memory", a.resident_memory}});
  }
  j["activations"] = acts;
  json util = json::array();
  for (const auto& u : r.utilization) {
    util.push_back({{"t_start", u.t_start},
                    {"t_end", u.t_end},
                    {"device_id", u.device_id},
                    {"avg", u.u.avg},
                    {"min", u.u.min},
                    {"max", u.u.max}});
  }
  j["utilization"] = util;
  json busy = json::array();
  for (const auto& b : r.worker_busy) {
    busy.push_back({{"predicate_id", b.predicate_id},
                    {"worker_id", b.worker_id},
                    {"device_id", b.device_id},
                    {"busy_ms", b.busy_ms},
                    {"batches", b.batches},
                    {"rows", b.rows}});
  }
  j["worker_busy"] = busy;
  json stats = json::array();
  for (const auto& s : r.stats_series) {
    stats.push_back({{"ts", s.ts},
                     {"predicate_id", s.predicate_id},
                     {"cost", s.cost ? json(*s.cost) : json(nullptr)},
                     {"selectivity", s.selectivity},
                     {"hit_rate", s.hit_rate}});
  }
  j["stats_series"] = stats;
  j["cost_points"] = r.cost_series.size();
  j["skipped_lines"] = r.skipped_lines;
  return j;
}

void write_report_csvs(const QueryReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "utilization.csv");
    write_utilization_csv(os, r.utilization);
  }
  {
    std::ofstream os(dir / "cost_series.csv");
    os << "first_tuple,predicate_id,key\n";
    for (const auto& c : r.cost_series) {
      os << c.first_tuple << ',' << c.predicate_id << ',';
      if (std::isfinite(c.key)) os << c.key;
      else os << "inf";
      os << '\n';
    }
  }
  {
    std::ofstream os(dir / "worker_busy.csv");
    os << "predicate_id,worker_id,device_id,busy_ms,batches,rows\n";
    for (const auto& b : r.worker_busy) {
      os << b.predicate_id << ',' << b.worker_id << ',' << b.device_id << ',' << b.busy_ms << ',' << b.batches
         << ',' << b.rows << '\n';
    }
  }
  {
    std::ofstream os(dir / "activation.csv");
    os << "ts,predicate_id,worker_id,device_id,resident_memory\n";
    for (const auto& a : r.activations) {
      os << a.ts << ',' << a.predicate_id << ',' << a.worker_id << ',' << a.device_id << ',' << a.resident_memory
         << '\n';
    }
  }
}

QueryReport cli_report(const fs::path& log, const fs::path& out_dir, double utilization_window_ms) {
  std::ifstream in(log);
  if (!in) throw Error("cannot open event log " + log.string());
  LogReadResult read = read_jsonl(in);
  QueryReport r = build_report(read.events, utilization_window_ms);
  r.skipped_lines = read.skipped;
  write_report_csvs(r, out_dir);
  std::ofstream os(out_dir / "report.json");
  os << to_json(r).dump(2) << '\n';
  return r;
}

}  // namespace aqp::harness
