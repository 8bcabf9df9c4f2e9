#pragma once

#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqp/core.hpp"

namespace aqp {

enum class EventKind {
  Pull,
  Route,
  Enqueue,
  Evaluate,
  Return,
  Retire,
  ActivateWorker,
  RejectInsert,
  Eos,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view s);

// One JSON-lines record. Optional fields are omitted when unset.
struct Event {
  double ts = 0.0;
  EventKind kind = EventKind::Pull;
  std::optional<BatchId> batch_id;
  std::optional<PredicateId> predicate_id;
  std::optional<WorkerId> worker_id;
  std::optional<std::size_t> queue_len;
  std::optional<std::size_t> rows_in;
  std::optional<std::size_t> rows_out;
  std::optional<DeviceId> device_id;
  std::optional<double> elapsed_ms;
  std::optional<std::size_t> cache_hits;
  nlohmann::json detail;  // kind-specific extras (reason snapshot, ledger, memory)
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

// Thread-safe append-only event sink.
class EventLog {
 public:
  void append(Event e);
  std::vector<Event> snapshot() const;
  std::size_t size() const;

  // JSON-lines text of the whole log.
  std::string to_jsonl() const;
  void write_jsonl(std::ostream& os) const;

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
};

struct LogReadResult {
  std::vector<Event> events;
  std::size_t skipped = 0;  // corrupt lines
};

LogReadResult read_jsonl(std::istream& is);

}  // namespace aqp
