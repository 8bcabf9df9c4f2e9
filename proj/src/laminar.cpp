#include "aqp/laminar.hpp"

#include <algorithm>
#include <cmath>

#include "aqp/errors.hpp"

namespace aqp {

std::string_view to_string(LaminarPolicy p) {
  return p == LaminarPolicy::RoundRobin ? "rr" : "data-aware";
}

std::optional<LaminarPolicy> parse_laminar_policy(std::string_view name) {
  if (name == "rr" || name == "round-robin") return LaminarPolicy::RoundRobin;
  if (name == "data-aware") return LaminarPolicy::DataAware;
  return std::nullopt;
}

std::string_view to_string(WorkerState s) {
  switch (s) {
    case WorkerState::Idle: return "idle";
    case WorkerState::Active: return "active";
    case WorkerState::Draining: return "draining";
    case WorkerState::Stopped: return "stopped";
  }
  return "idle";
}

std::size_t target_workers(double total_mem, std::optional<double> used_per_worker, std::size_t cap) {
  if (!used_per_worker) throw WarmupPending("worker memory not observed yet");
  const double used = *used_per_worker;
  if (used <= 0.0) return cap;
  if (used > total_mem) return 1;
  const auto n = static_cast<std::size_t>(std::floor(total_mem / used));
  return std::max<std::size_t>(1, std::min(n, cap));
}

double heuristic_cost(const RoutingBatch& batch, CostHeuristic heuristic) {
  if (heuristic == CostHeuristic::Constant) return static_cast<double>(batch.rows.size());
  double sum = 0.0;
  for (const auto& r : batch.rows) sum += static_cast<double>(r.payload_size);
  return sum;
}

WorkerId pick_worker_rr(const std::vector<WorkerId>& active, std::optional<WorkerId> last) {
  if (active.empty()) throw Error("pick_worker_rr: no active worker");
  std::vector<WorkerId> ids = active;
  std::sort(ids.begin(), ids.end());
  if (!last) return ids.front();
  auto it = std::upper_bound(ids.begin(), ids.end(), *last);
  return it == ids.end() ? ids.front() : *it;
}

WorkerId pick_worker_data_aware(const std::map<WorkerId, double>& loads) {
  if (loads.empty()) throw Error("pick_worker_data_aware: no active worker");
  auto best = loads.begin();
  for (auto it = loads.begin(); it != loads.end(); ++it) {
    if (it->second < best->second) best = it;  // map order gives the lowest id on ties
  }
  return best->first;
}

DeviceMemory::DeviceMemory(const std::vector<DeviceSpec>& devices) {
  for (const auto& d : devices) {
    total_[d.device_id] = d.total_mem;
    used_[d.device_id] = 0.0;
  }
}

bool DeviceMemory::try_reserve(DeviceId d, double amount) {
  std::lock_guard lock(mu_);
  if (used_[d] + amount > total_[d] + 1e-9) return false;
  used_[d] += amount;
  return true;
}

void DeviceMemory::force_reserve(DeviceId d, double amount) {
  std::lock_guard lock(mu_);
  used_[d] += amount;
}

void DeviceMemory::release(DeviceId d, double amount) {
  std::lock_guard lock(mu_);
  used_[d] = std::max(0.0, used_[d] - amount);
}

double DeviceMemory::used(DeviceId d) const {
  std::lock_guard lock(mu_);
  auto it = used_.find(d);
  return it == used_.end() ? 0.0 : it->second;
}

double DeviceMemory::total(DeviceId d) const {
  std::lock_guard lock(mu_);
  auto it = total_.find(d);
  return it == total_.end() ? 0.0 : it->second;
}

LaminarRouter::LaminarRouter(PredicateSpec spec, std::vector<DeviceSpec> pool, LaminarConfig config,
                             DeviceMemory* memory)
    : spec_(std::move(spec)), pool_(std::move(pool)), cfg_(config), memory_(memory) {
  if (pool_.empty()) throw Error("predicate '" + spec_.name + "' has no device in pool '" + spec_.pool + "'");
  if (cfg_.contexts_per_device == 0 || cfg_.contexts_per_device > kMaxContextsPerDevice) {
    throw Error("contexts_per_device must be in [1, 50]");
  }
  std::sort(pool_.begin(), pool_.end(),
            [](const DeviceSpec& a, const DeviceSpec& b) { return a.device_id < b.device_id; });
  for (std::size_t d = 0; d < pool_.size(); ++d) {
    for (std::size_t c = 0; c < cfg_.contexts_per_device; ++c) {
      WorkerContext w;
      w.worker_id = static_cast<WorkerId>(workers_.size());
      w.predicate_id = spec_.predicate_id;
      w.device_id = pool_[d].device_id;
      w.device_index = d;
      workers_.push_back(w);
    }
  }
  capped_.assign(pool_.size(), false);
}

std::size_t LaminarRouter::target() const {
  std::size_t t = 0;
  for (auto v : device_targets_) t += v;
  return t;
}

std::size_t LaminarRouter::active_count() const {
  return static_cast<std::size_t>(std::count_if(workers_.begin(), workers_.end(), [](const WorkerContext& w) {
    return w.state == WorkerState::Active;
  }));
}

bool LaminarRouter::fits(const WorkerContext& w) const {
  if (footprint() <= 0.0 || memory_ == nullptr) return true;
  return memory_->used(w.device_id) + footprint() <= memory_->total(w.device_id) + 1e-9;
}

std::optional<std::size_t> LaminarRouter::next_device() const {
  const std::size_t n = pool_.size();
  const std::size_t start = last_device_ ? (*last_device_ + 1) % n : 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t d = (start + k) % n;
    if (device_targets_[d] > 0) return d;
  }
  return std::nullopt;
}

WorkerChoice LaminarRouter::pick_in(std::size_t scope, const RoutingBatch&, double est) const {
  const bool multi = multi_device();
  auto in_scope = [&](const WorkerContext& w) { return !multi || w.device_index == scope; };
  std::vector<WorkerId> active;
  for (const auto& w : workers_) {
    if (in_scope(w) && w.state == WorkerState::Active) active.push_back(w.worker_id);
  }
  if (active.size() < device_targets_[scope] && !capped_[scope]) {
    for (const auto& w : workers_) {
      if (in_scope(w) && w.state == WorkerState::Idle) {
        if (fits(w)) return {w.worker_id, true, est};
        break;
      }
    }
  }
  if (active.empty()) {
    // Nothing usable here (memory exhausted before the first activation): fall back to any active worker.
    for (const auto& w : workers_) {
      if (w.state == WorkerState::Active) active.push_back(w.worker_id);
    }
  }
  if (cfg_.policy == LaminarPolicy::RoundRobin) {
    std::optional<WorkerId> last;
    if (auto it = rr_last_.find(scope); it != rr_last_.end()) last = it->second;
    return {pick_worker_rr(active, last), false, est};
  }
  std::map<WorkerId, double> loads;
  for (WorkerId id : active) loads[id] = loads_.at(id);
  return {pick_worker_data_aware(loads), false, est};
}

WorkerChoice LaminarRouter::choose(const RoutingBatch& batch) const {
  const double est = heuristic_cost(batch, spec_.cost_heuristic);
  if (!sized_) return {0, workers_[0].state == WorkerState::Idle, est};
  std::size_t scope = 0;
  if (multi_device()) scope = next_device().value_or(0);
  return pick_in(scope, batch, est);
}

bool LaminarRouter::commit(const WorkerChoice& choice) {
  auto& w = workers_.at(choice.worker_id);
  const std::size_t scope = multi_device() ? w.device_index : 0;
  if (choice.activate) {
    if (w.state != WorkerState::Idle) throw Error("activation of a non-idle worker context");
    if (footprint() > 0.0 && memory_ != nullptr) {
      if (!sized_) {
        memory_->force_reserve(w.device_id, footprint());
      } else if (!memory_->try_reserve(w.device_id, footprint())) {
        capped_[scope] = true;
        return false;
      }
    }
    w.state = WorkerState::Active;
    w.resident_memory = footprint();
    loads_[w.worker_id] = 0.0;
  } else if (w.state != WorkerState::Active) {
    throw Error("dispatch to an inactive worker");
  }
  loads_[w.worker_id] += choice.estimate;
  rr_last_[scope] = w.worker_id;
  last_device_ = w.device_index;
  return true;
}

void LaminarRouter::on_complete(WorkerId worker, double estimate) {
  auto it = loads_.find(worker);
  if (it == loads_.end()) throw Error("completion from a worker that was never dispatched to");
  it->second -= estimate;
  if (std::abs(it->second) < 1e-9) it->second = 0.0;
  if (!sized_) size_pool();
}

void LaminarRouter::size_pool() {
  const double fp = footprint();
  const std::size_t cpd = cfg_.contexts_per_device;
  if (multi_device()) {
    const std::size_t n = pool_.size();
    device_targets_.assign(n, 0);
    std::optional<std::size_t> cap = spec_.max_workers;
    if (fp <= 0.0 && !cap) cap = 1;
    for (std::size_t d = 0; d < n; ++d) {
      device_targets_[d] = fp > 0.0 ? target_workers(pool_[d].total_mem, fp, cpd) : cpd;
    }
    if (cap) {
      std::vector<std::size_t> share(n, 0);
      std::size_t left = *cap;
      bool moved = true;
      while (left > 0 && moved) {
        moved = false;
        for (std::size_t d = 0; d < n && left > 0; ++d) {
          if (share[d] < device_targets_[d]) {
            ++share[d];
            --left;
            moved = true;
          }
        }
      }
      device_targets_ = share;
    }
    device_targets_[0] = std::max<std::size_t>(device_targets_[0], 1);
  } else {
    std::size_t t = fp > 0.0 ? target_workers(pool_[0].total_mem, fp, cpd) : spec_.max_workers.value_or(1);
    if (fp > 0.0 && spec_.max_workers) t = std::min(t, *spec_.max_workers);
    t = std::clamp<std::size_t>(t, 1, workers_.size());
    device_targets_ = {t};
  }
  sized_ = true;
}

void LaminarRouter::shutdown() {
  for (auto& w : workers_) {
    if (w.state == WorkerState::Active) w.state = WorkerState::Draining;
    if (w.state == WorkerState::Draining) {
      if (w.resident_memory > 0.0 && memory_ != nullptr) memory_->release(w.device_id, w.resident_memory);
      w.resident_memory = 0.0;
    }
    w.state = WorkerState::Stopped;
  }
}

nlohmann::json LaminarRouter::ledger_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, load] : loads_) j[std::to_string(id)] = load;
  return j;
}

}  // namespace aqp
