#include "aqp/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

namespace aqp {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "pull", "route", "enqueue", "evaluate", "return", "retire", "activate_worker", "reject_insert", "eos",
};

template <typename T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) v = it->get<T>();
}

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

nlohmann::json to_json(const Event& e) {
  nlohmann::json j;
  j["ts"] = e.ts;
  j["kind"] = std::string(to_string(e.kind));
  put_opt(j, "batch_id", e.batch_id);
  put_opt(j, "predicate_id", e.predicate_id);
  put_opt(j, "worker_id", e.worker_id);
  put_opt(j, "queue_len", e.queue_len);
  put_opt(j, "rows_in", e.rows_in);
  put_opt(j, "rows_out", e.rows_out);
  put_opt(j, "device_id", e.device_id);
  put_opt(j, "elapsed_ms", e.elapsed_ms);
  put_opt(j, "cache_hits", e.cache_hits);
  if (!e.detail.is_null()) j["detail"] = e.detail;
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.ts = j.at("ts").get<double>();
  auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event kind");
  e.kind = *kind;
  get_opt(j, "batch_id", e.batch_id);
  get_opt(j, "predicate_id", e.predicate_id);
  get_opt(j, "worker_id", e.worker_id);
  get_opt(j, "queue_len", e.queue_len);
  get_opt(j, "rows_in", e.rows_in);
  get_opt(j, "rows_out", e.rows_out);
  get_opt(j, "device_id", e.device_id);
  get_opt(j, "elapsed_ms", e.elapsed_ms);
  get_opt(j, "cache_hits", e.cache_hits);
  if (auto it = j.find("detail"); it != j.end()) e.detail = *it;
  return e;
}

void EventLog::append(Event e) {
  std::lock_guard lock(mu_);
  events_.push_back(std::move(e));
}

std::vector<Event> EventLog::snapshot() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

void EventLog::write_jsonl(std::ostream& os) const {
  std::lock_guard lock(mu_);
  for (const auto& e : events_) os << to_json(e).dump() << '\n';
}

std::string EventLog::to_jsonl() const {
  std::ostringstream os;
  write_jsonl(os);
  return os.str();
}

LogReadResult read_jsonl(std::istream& is) {
  LogReadResult r;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      r.events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception&) {
      ++r.skipped;
    }
  }
  return r;
}

}  // namespace aqp
