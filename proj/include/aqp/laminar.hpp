#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aqp/core.hpp"
#include "aqp/simdev.hpp"

namespace aqp {

enum class LaminarPolicy { RoundRobin, DataAware };

std::string_view to_string(LaminarPolicy p);
std::optional<LaminarPolicy> parse_laminar_policy(std::string_view name);

inline constexpr std::size_t kMaxContextsPerDevice = 50;

struct LaminarConfig {
  LaminarPolicy policy = LaminarPolicy::RoundRobin;
  bool alternate_devices = true;
  double startup_ms = 200.0;  // activation latency before a new worker can evaluate
  std::size_t contexts_per_device = kMaxContextsPerDevice;
};

enum class WorkerState { Idle, Active, Draining, Stopped };

std::string_view to_string(WorkerState s);

struct WorkerContext {
  WorkerId worker_id = 0;
  PredicateId predicate_id = 0;
  DeviceId device_id = 0;
  std::size_t device_index = 0;  // position of the device in the pool
  WorkerState state = WorkerState::Idle;
  double resident_memory = 0.0;
};

// min(floor(total / used), cap), or 1 when one worker does not fit.
// Throws WarmupPending when used is unknown.
std::size_t target_workers(double total_mem, std::optional<double> used_per_worker, std::size_t cap);

// Load estimate of a batch: row count or summed payload size.
double heuristic_cost(const RoutingBatch& batch, CostHeuristic heuristic);

// Smallest active id greater than last, wrapping; the first one without a last.
WorkerId pick_worker_rr(const std::vector<WorkerId>& active, std::optional<WorkerId> last);

// argmin outstanding load, ties to the lowest id.
WorkerId pick_worker_data_aware(const std::map<WorkerId, double>& loads);

// Per-device memory in use, shared by every laminar so the ceiling holds
// across predicates.
class DeviceMemory {
 public:
  explicit DeviceMemory(const std::vector<DeviceSpec>& devices);
  bool try_reserve(DeviceId d, double amount);
  void force_reserve(DeviceId d, double amount);
  void release(DeviceId d, double amount);
  double used(DeviceId d) const;
  double total(DeviceId d) const;

 private:
  mutable std::mutex mu_;
  std::map<DeviceId, double> total_;
  std::map<DeviceId, double> used_;
};

struct WorkerChoice {
  WorkerId worker_id = 0;
  bool activate = false;
  double estimate = 0.0;
};

// Dispatch side of one predicate: lazily activated worker contexts on the
// devices of its pool, sized once after the first completion.
class LaminarRouter {
 public:
  LaminarRouter(PredicateSpec spec, std::vector<DeviceSpec> pool, LaminarConfig config,
                DeviceMemory* memory);

  // Pure: picks the worker for batch (and whether it must be activated first).
  WorkerChoice choose(const RoutingBatch& batch) const;

  // Applies a choice: activation, ledger increment, cursors. Returns false if
  // the activation no longer fits in device memory; choose again then.
  bool commit(const WorkerChoice& choice);

  // Ledger decrement for a finished batch; the first one sizes the pool.
  void on_complete(WorkerId worker, double estimate);

  // End of stream: active workers drain and stop, unused contexts stop.
  void shutdown();

  bool sized() const { return sized_; }
  std::size_t target() const;
  const std::vector<std::size_t>& device_targets() const { return device_targets_; }
  std::size_t active_count() const;
  const std::vector<WorkerContext>& workers() const { return workers_; }
  const WorkerContext& worker(WorkerId id) const { return workers_.at(id); }
  const std::map<WorkerId, double>& loads() const { return loads_; }
  const PredicateSpec& spec() const { return spec_; }
  const DeviceSpec& device_of(WorkerId id) const { return pool_[workers_.at(id).device_index]; }
  double footprint() const { return spec_.worker_memory; }
  nlohmann::json ledger_json() const;

 private:
  bool multi_device() const { return cfg_.alternate_devices && pool_.size() > 1; }
  std::optional<std::size_t> next_device() const;
  WorkerChoice pick_in(std::size_t scope, const RoutingBatch& batch, double est) const;
  bool fits(const WorkerContext& w) const;
  void size_pool();

  PredicateSpec spec_;
  std::vector<DeviceSpec> pool_;
  LaminarConfig cfg_;
  DeviceMemory* memory_;
  std::vector<WorkerContext> workers_;
  std::map<WorkerId, double> loads_;  // active workers only
  bool sized_ = false;
  // Per device when alternating; a single flat target otherwise.
  std::vector<std::size_t> device_targets_;
  std::map<std::size_t, WorkerId> rr_last_;  // per scope
  std::optional<std::size_t> last_device_;
  std::vector<bool> capped_;  // scope ran out of device memory
};

}  // namespace aqp
