#include "aqp/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "aqp/errors.hpp"
#include "aqp/querylang.hpp"

namespace aqp::harness {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.contains(it.key())) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

const json* field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double num(const json& j, const std::string& path, const char* key, double def) {
  const json* v = field(j, key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
  return v->get<double>();
}

std::uint64_t uint(const json& j, const std::string& path, const char* key, std::uint64_t def) {
  const json* v = field(j, key);
  if (!v) return def;
  if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
    throw ConfigError(join(path, key), "expected a non-negative integer");
  }
  return v->get<std::uint64_t>();
}

bool boolean(const json& j, const std::string& path, const char* key, bool def) {
  const json* v = field(j, key);
  if (!v) return def;
  if (!v->is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v->get<bool>();
}

std::string str(const json& j, const std::string& path, const char* key, const std::string& def) {
  const json* v = field(j, key);
  if (!v) return def;
  if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
  return v->get<std::string>();
}

Scalar to_scalar(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(path, "expected a number or string");
}

json from_scalar(const Scalar& s) {
  return std::visit([](const auto& x) { return json(x); }, s);
}

ValueGen parse_gen(const json& j, const std::string& path) {
  ValueGen g;
  if (!j.is_object()) {
    g.values = {to_scalar(j, path)};
    return g;
  }
  check_keys(j, path, {"kind", "value", "min", "max", "values"});
  const std::string kind = str(j, path, "kind", "constant");
  if (kind == "constant") {
    const json* v = field(j, "value");
    if (!v) throw ConfigError(join(path, "value"), "missing");
    g.values = {to_scalar(*v, join(path, "value"))};
  } else if (kind == "uniform_int") {
    g.kind = ValueGen::Kind::UniformInt;
    g.lo = static_cast<std::int64_t>(num(j, path, "min", 0));
    g.hi = static_cast<std::int64_t>(num(j, path, "max", 0));
    if (g.hi < g.lo) throw ConfigError(join(path, "max"), "must be >= min");
  } else if (kind == "choice" || kind == "cycle") {
    g.kind = kind == "choice" ? ValueGen::Kind::Choice : ValueGen::Kind::Cycle;
    const json* v = field(j, "values");
    if (!v || !v->is_array() || v->empty()) throw ConfigError(join(path, "values"), "expected a non-empty array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      g.values.push_back(to_scalar((*v)[i], join(path, "values[" + std::to_string(i) + "]")));
    }
  } else {
    throw ConfigError(join(path, "kind"), "unknown generator '" + kind + "'");
  }
  return g;
}

json gen_json(const ValueGen& g) {
  switch (g.kind) {
    case ValueGen::Kind::Constant:
      return {{"kind", "constant"}, {"value", g.values.empty() ? json(0) : from_scalar(g.values[0])}};
    case ValueGen::Kind::UniformInt:
      return {{"kind", "uniform_int"}, {"min", g.lo}, {"max", g.hi}};
    case ValueGen::Kind::Choice:
    case ValueGen::Kind::Cycle: {
      json vals = json::array();
      for (const auto& v : g.values) vals.push_back(from_scalar(v));
      return {{"kind", g.kind == ValueGen::Kind::Choice ? "choice" : "cycle"}, {"values", vals}};
    }
  }
  return {};
}

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

UdfConfig parse_udf(const std::string& name, const json& j, const std::string& path, std::uint64_t seed) {
  check_keys(j, path, {"cost", "decision", "pool", "cacheable", "heuristic", "worker_memory", "max_workers", "fail_on"});
  UdfConfig u;
  u.spec.name = name;
  const json* cost = field(j, "cost");
  if (!cost) throw ConfigError(join(path, "cost"), "missing");
  const std::string cpath = join(path, "cost");
  if (cost->is_number()) {
    u.spec.cost = ConstantCost{cost->get<double>()};
  } else {
    check_keys(*cost, cpath, {"kind", "ms", "ms_per_unit", "base_ms"});
    const std::string kind = str(*cost, cpath, "kind", "constant");
    if (kind == "constant") {
      u.spec.cost = ConstantCost{num(*cost, cpath, "ms", 0.0)};
    } else if (kind == "size_linear") {
      u.spec.cost = SizeLinearCost{num(*cost, cpath, "ms_per_unit", 0.0), num(*cost, cpath, "base_ms", 0.0)};
    } else {
      throw ConfigError(join(cpath, "kind"), "unknown cost model '" + kind + "'");
    }
  }
  const double ms = std::visit(
      [](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, ConstantCost>) return c.ms_per_tuple;
        else return std::min(c.ms_per_unit, c.base_ms);
      },
      u.spec.cost);
  if (ms < 0) throw ConfigError(cpath, "costs must be >= 0");

  const json* dec = field(j, "decision");
  const std::string dpath = join(path, "decision");
  if (!dec) throw ConfigError(dpath, "missing");
  check_keys(*dec, dpath, {"kind", "p", "seed", "pass", "expr"});
  const std::string kind = str(*dec, dpath, "kind", "bernoulli");
  if (kind == "bernoulli") {
    const double p = num(*dec, dpath, "p", 0.5);
    if (p < 0.0 || p > 1.0) throw ConfigError(join(dpath, "p"), "must lie in [0, 1]");
    u.spec.decision = SeededBernoulli{p, uint(*dec, dpath, "seed", mix64(seed ^ fnv(name)))};
  } else if (kind == "range") {
    RangeRule r;
    const json* pass = field(*dec, "pass");
    if (!pass || !pass->is_array()) throw ConfigError(join(dpath, "pass"), "expected [[begin, end], ...]");
    for (std::size_t i = 0; i < pass->size(); ++i) {
      const json& e = (*pass)[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw ConfigError(join(dpath, "pass[" + std::to_string(i) + "]"), "expected [begin, end]");
      }
      r.pass.push_back(TupleRange{e[0].get<TupleId>(), e[1].get<TupleId>()});
    }
    u.spec.decision = r;
  } else if (kind == "rule") {
    const std::string expr = str(*dec, dpath, "expr", "");
    try {
      auto parsed = ql::parse("scan x | filter " + expr);
      if (parsed.filters.size() != 1 || parsed.filters[0].udf_backed()) {
        throw ConfigError(join(dpath, "expr"), "expected one comparison without udf()");
      }
      u.spec.decision = AttributeRule{parsed.filters[0]};
    } catch (const SyntaxError& e) {
      throw ConfigError(join(dpath, "expr"), e.what());
    }
  } else {
    throw ConfigError(join(dpath, "kind"), "unknown decision model '" + kind + "'");
  }

  u.pool = str(j, path, "pool", "cpu");
  u.cacheable = boolean(j, path, "cacheable", false);
  const std::string h = str(j, path, "heuristic", "constant");
  if (h == "constant") u.heuristic = CostHeuristic::Constant;
  else if (h == "payload_size") u.heuristic = CostHeuristic::PayloadSize;
  else throw ConfigError(join(path, "heuristic"), "expected constant or payload_size");
  u.worker_memory = num(j, path, "worker_memory", 0.0);
  if (u.worker_memory < 0) throw ConfigError(join(path, "worker_memory"), "must be >= 0");
  if (field(j, "max_workers")) {
    u.max_workers = uint(j, path, "max_workers", 1);
    if (*u.max_workers == 0) throw ConfigError(join(path, "max_workers"), "must be >= 1");
  }
  if (const json* f = field(j, "fail_on")) {
    if (!f->is_array()) throw ConfigError(join(path, "fail_on"), "expected an array of tuple ids");
    for (const auto& id : *f) u.spec.fail_on.insert(id.get<TupleId>());
  }
  return u;
}

json udf_json(const UdfConfig& u) {
  json j;
  if (const auto* c = std::get_if<ConstantCost>(&u.spec.cost)) {
    j["cost"] = {{"kind", "constant"}, {"ms", c->ms_per_tuple}};
  } else {
    const auto& s = std::get<SizeLinearCost>(u.spec.cost);
    j["cost"] = {{"kind", "size_linear"}, {"ms_per_unit", s.ms_per_unit}, {"base_ms", s.base_ms}};
  }
  if (const auto* b = std::get_if<SeededBernoulli>(&u.spec.decision)) {
    j["decision"] = {{"kind", "bernoulli"}, {"p", b->p}, {"seed", b->seed}};
  } else if (const auto* r = std::get_if<RangeRule>(&u.spec.decision)) {
    json pass = json::array();
    for (const auto& rg : r->pass) pass.push_back({rg.begin, rg.end});
    j["decision"] = {{"kind", "range"}, {"pass", pass}};
  } else {
    const auto& a = std::get<AttributeRule>(u.spec.decision);
    j["decision"] = {{"kind", "rule"}, {"expr", ql::pretty_print(a.rule).substr(7)}};
  }
  j["pool"] = u.pool;
  j["cacheable"] = u.cacheable;
  j["heuristic"] = u.heuristic == CostHeuristic::Constant ? "constant" : "payload_size";
  j["worker_memory"] = u.worker_memory;
  if (u.max_workers) j["max_workers"] = *u.max_workers;
  if (!u.spec.fail_on.empty()) j["fail_on"] = u.spec.fail_on;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "", {"name", "mode", "seed", "dataset", "program", "udfs", "devices", "policies", "queues", "eddy",
                     "laminar", "cache", "watchdog_ms", "failure_policy", "utilization_window_ms", "execution",
                     "output_dir"});
  ExperimentConfig c;
  c.name = str(j, "", "name", c.name);
  const std::string mode = str(j, "", "mode", "virtual");
  if (mode == "virtual") c.mode = RunMode::Virtual;
  else if (mode == "wall") c.mode = RunMode::Wall;
  else throw ConfigError("mode", "expected virtual or wall");
  if (!field(j, "seed") && c.mode == RunMode::Virtual) throw ConfigError("seed", "required in virtual mode");
  c.seed = uint(j, "", "seed", c.seed);

  if (const json* d = field(j, "dataset")) {
    check_keys(*d, "dataset", {"name", "rows", "first_id", "payload", "attributes"});
    c.dataset.name = str(*d, "dataset", "name", c.dataset.name);
    c.dataset.rows = uint(*d, "dataset", "rows", c.dataset.rows);
    c.dataset.first_id = uint(*d, "dataset", "first_id", 0);
    if (const json* p = field(*d, "payload")) c.dataset.payload = parse_gen(*p, "dataset.payload");
    else c.dataset.payload.values = {std::int64_t{0}};
    if (const json* a = field(*d, "attributes")) {
      if (!a->is_object()) throw ConfigError("dataset.attributes", "expected an object");
      for (auto it = a->begin(); it != a->end(); ++it) {
        c.dataset.attributes[it.key()] = parse_gen(it.value(), "dataset.attributes." + it.key());
      }
    }
  } else {
    c.dataset.payload.values = {std::int64_t{0}};
  }

  if (const json* u = field(j, "udfs")) {
    if (!u->is_object()) throw ConfigError("udfs", "expected an object");
    for (auto it = u->begin(); it != u->end(); ++it) {
      c.udfs[it.key()] = parse_udf(it.key(), it.value(), "udfs." + it.key(), c.seed);
    }
  }

  c.program = str(j, "", "program", "");
  if (c.program.empty()) throw ConfigError("program", "missing");
  std::set<std::string> known;
  for (const auto& [name, _] : c.udfs) known.insert(name);
  ql::PipelineExpr expr;
  try {
    expr = ql::parse(c.program, known);
  } catch (const SyntaxError& e) {
    throw ConfigError("program", e.what());
  } catch (const UnknownPredicate& e) {
    throw ConfigError("program", e.what());
  }
  if (expr.source.dataset != c.dataset.name) {
    throw ConfigError("program", "scans '" + expr.source.dataset + "' but the dataset is '" + c.dataset.name + "'");
  }

  if (const json* devs = field(j, "devices")) {
    if (!devs->is_array()) throw ConfigError("devices", "expected an array");
    std::set<DeviceId> ids;
    for (std::size_t i = 0; i < devs->size(); ++i) {
      const std::string path = "devices[" + std::to_string(i) + "]";
      const json& d = (*devs)[i];
      check_keys(d, path, {"id", "pool", "total_mem", "speed"});
      DeviceSpec s;
      s.device_id = static_cast<DeviceId>(uint(d, path, "id", i));
      s.pool = str(d, path, "pool", "cpu");
      s.total_mem = num(d, path, "total_mem", 1.0);
      s.speed_factor = num(d, path, "speed", 1.0);
      if (s.total_mem <= 0) throw ConfigError(join(path, "total_mem"), "must be > 0");
      if (s.speed_factor <= 0) throw ConfigError(join(path, "speed"), "must be > 0");
      if (!ids.insert(s.device_id).second) throw ConfigError(join(path, "id"), "duplicate device id");
      c.devices.push_back(s);
    }
  }
  bool has_cpu = false;
  DeviceId next_id = 0;
  for (const auto& d : c.devices) {
    has_cpu = has_cpu || d.pool == "cpu";
    next_id = std::max<DeviceId>(next_id, d.device_id + 1);
  }
  if (!has_cpu) c.devices.push_back(DeviceSpec{next_id, "cpu", 1.0, 1.0});
  for (const auto& [name, u] : c.udfs) {
    bool found = false;
    for (const auto& d : c.devices) found = found || d.pool == u.pool;
    if (!found) throw ConfigError("udfs." + name + ".pool", "no device serves pool '" + u.pool + "'");
  }

  if (const json* p = field(j, "policies")) {
    check_keys(*p, "policies", {"eddy", "laminar", "alternate_devices", "static_order"});
    const std::string e = str(*p, "policies", "eddy", "cost");
    auto k = parse_policy(e);
    if (!k) throw ConfigError("policies.eddy", "unknown policy '" + e + "'");
    c.eddy_policy = *k;
    const std::string l = str(*p, "policies", "laminar", "rr");
    auto lk = parse_laminar_policy(l);
    if (!lk) throw ConfigError("policies.laminar", "unknown policy '" + l + "'");
    c.laminar.policy = *lk;
    c.laminar.alternate_devices = boolean(*p, "policies", "alternate_devices", true);
    if (const json* so = field(*p, "static_order")) {
      if (!so->is_array()) throw ConfigError("policies.static_order", "expected an array of udf names");
      for (std::size_t i = 0; i < so->size(); ++i) {
        const std::string path = "policies.static_order[" + std::to_string(i) + "]";
        if (!(*so)[i].is_string()) throw ConfigError(path, "expected a udf name");
        const auto name = (*so)[i].get<std::string>();
        bool in_program = false;
        for (const auto& f : expr.filters) in_program = in_program || f.udf_name() == name;
        if (!in_program) throw ConfigError(path, "'" + name + "' is not a udf filter of the program");
        c.static_order.push_back(name);
      }
    }
  }

  if (const json* q = field(j, "queues")) {
    check_keys(*q, "queues", {"capacity", "lambda", "batch_rows", "laminar_len", "worker_len"});
    c.central.capacity = uint(*q, "queues", "capacity", c.central.capacity);
    c.central.lambda = num(*q, "queues", "lambda", c.central.lambda);
    c.pipeline.routing_batch_rows = uint(*q, "queues", "batch_rows", c.pipeline.routing_batch_rows);
    c.pipeline.laminar_input_queue_len = uint(*q, "queues", "laminar_len", c.pipeline.laminar_input_queue_len);
    c.pipeline.worker_input_queue_len = uint(*q, "queues", "worker_len", c.pipeline.worker_input_queue_len);
  }
  try {
    c.central.validate();
  } catch (const Error& e) {
    throw ConfigError("queues.lambda", e.what());
  }
  try {
    c.pipeline.validate();
  } catch (const Error& e) {
    throw ConfigError("queues", e.what());
  }

  if (const json* e = field(j, "eddy")) {
    check_keys(*e, "eddy", {"warmup_batches", "alpha", "prior", "churn_every"});
    c.warmup_batches = uint(*e, "eddy", "warmup_batches", c.warmup_batches);
    c.alpha = num(*e, "eddy", "alpha", c.alpha);
    c.prior = num(*e, "eddy", "prior", c.prior);
    c.churn_every = uint(*e, "eddy", "churn_every", 0);
    if (c.warmup_batches == 0) throw ConfigError("eddy.warmup_batches", "must be >= 1");
    if (!(c.alpha > 0 && c.alpha <= 1)) throw ConfigError("eddy.alpha", "must lie in (0, 1]");
    if (c.prior < 0 || c.prior > 1) throw ConfigError("eddy.prior", "must lie in [0, 1]");
  }

  if (const json* l = field(j, "laminar")) {
    check_keys(*l, "laminar", {"startup_ms", "contexts_per_device"});
    c.laminar.startup_ms = num(*l, "laminar", "startup_ms", c.laminar.startup_ms);
    c.laminar.contexts_per_device = uint(*l, "laminar", "contexts_per_device", c.laminar.contexts_per_device);
    if (c.laminar.startup_ms < 0) throw ConfigError("laminar.startup_ms", "must be >= 0");
    if (c.laminar.contexts_per_device == 0 || c.laminar.contexts_per_device > kMaxContextsPerDevice) {
      throw ConfigError("laminar.contexts_per_device", "must lie in [1, 50]");
    }
  }

  if (const json* ca = field(j, "cache")) {
    check_keys(*ca, "cache", {"dir", "fresh", "preload"});
    if (field(*ca, "dir")) c.cache_dir = str(*ca, "cache", "dir", "");
    c.cache_fresh = boolean(*ca, "cache", "fresh", true);
    if (const json* pl = field(*ca, "preload")) {
      if (!pl->is_array()) throw ConfigError("cache.preload", "expected an array");
      for (std::size_t i = 0; i < pl->size(); ++i) {
        const std::string path = "cache.preload[" + std::to_string(i) + "]";
        check_keys((*pl)[i], path, {"udf", "gt", "lt"});
        CachePreload p;
        p.udf = str((*pl)[i], path, "udf", "");
        if (!c.udfs.contains(p.udf)) throw ConfigError(join(path, "udf"), "unknown udf '" + p.udf + "'");
        p.gt = uint((*pl)[i], path, "gt", 0);
        p.lt = uint((*pl)[i], path, "lt", 0);
        c.preloads.push_back(p);
      }
      if (!c.preloads.empty() && !c.cache_dir) throw ConfigError("cache.dir", "required when preloading");
    }
  }

  c.watchdog_ms = num(j, "", "watchdog_ms", c.watchdog_ms);
  if (c.watchdog_ms <= 0) throw ConfigError("watchdog_ms", "must be > 0");
  const std::string fp = str(j, "", "failure_policy", "abort");
  if (fp == "abort") c.failure = FailurePolicy::Abort;
  else if (fp == "drop") c.failure = FailurePolicy::DropBatch;
  else throw ConfigError("failure_policy", "expected abort or drop");
  c.utilization_window_ms = num(j, "", "utilization_window_ms", c.utilization_window_ms);
  if (c.utilization_window_ms <= 0) throw ConfigError("utilization_window_ms", "must be > 0");
  const std::string ex = str(j, "", "execution", "sleep");
  if (ex == "sleep") c.execution = ExecutionMode::Sleep;
  else if (ex == "busy-spin") c.execution = ExecutionMode::BusySpin;
  else throw ConfigError("execution", "expected sleep or busy-spin");
  if (field(j, "output_dir")) c.output_dir = str(j, "", "output_dir", "");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["mode"] = c.mode == RunMode::Virtual ? "virtual" : "wall";
  j["seed"] = c.seed;
  json attrs = json::object();
  for (const auto& [k, g] : c.dataset.attributes) attrs[k] = gen_json(g);
  j["dataset"] = {{"name", c.dataset.name},
                  {"rows", c.dataset.rows},
                  {"first_id", c.dataset.first_id},
                  {"payload", gen_json(c.dataset.payload)},
                  {"attributes", attrs}};
  j["program"] = c.program;
  json udfs = json::object();
  for (const auto& [k, u] : c.udfs) udfs[k] = udf_json(u);
  j["udfs"] = udfs;
  json devs = json::array();
  for (const auto& d : c.devices) {
    devs.push_back({{"id", d.device_id}, {"pool", d.pool}, {"total_mem", d.total_mem}, {"speed", d.speed_factor}});
  }
  j["devices"] = devs;
  j["policies"] = {{"eddy", std::string(to_string(c.eddy_policy))},
                   {"laminar", std::string(to_string(c.laminar.policy))},
                   {"alternate_devices", c.laminar.alternate_devices},
                   {"static_order", c.static_order}};
  j["queues"] = {{"capacity", c.central.capacity},
                 {"lambda", c.central.lambda},
                 {"batch_rows", c.pipeline.routing_batch_rows},
                 {"laminar_len", c.pipeline.laminar_input_queue_len},
                 {"worker_len", c.pipeline.worker_input_queue_len}};
  j["eddy"] = {{"warmup_batches", c.warmup_batches}, {"alpha", c.alpha}, {"prior", c.prior}, {"churn_every", c.churn_every}};
  j["laminar"] = {{"startup_ms", c.laminar.startup_ms}, {"contexts_per_device", c.laminar.contexts_per_device}};
  json cache = {{"fresh", c.cache_fresh}};
  if (c.cache_dir) cache["dir"] = c.cache_dir->string();
  json pl = json::array();
  for (const auto& p : c.preloads) pl.push_back({{"udf", p.udf}, {"gt", p.gt}, {"lt", p.lt}});
  cache["preload"] = pl;
  j["cache"] = cache;
  j["watchdog_ms"] = c.watchdog_ms;
  j["failure_policy"] = c.failure == FailurePolicy::Abort ? "abort" : "drop";
  j["utilization_window_ms"] = c.utilization_window_ms;
  j["execution"] = c.execution == ExecutionMode::BusySpin ? "busy-spin" : "sleep";
  if (c.output_dir) j["output_dir"] = c.output_dir->string();
  return j;
}

json load_config_json(const std::string& ref) {
  constexpr std::string_view prefix = "preset:";
  if (ref.starts_with(prefix)) return preset_json(ref.substr(prefix.size()));
  std::ifstream in(ref);
  if (!in) throw ConfigError("<file>", "cannot open " + ref);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& ref) { return parse_config(load_config_json(ref)); }

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(path, "empty path component");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

}  // namespace aqp::harness
