#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "aqp/core.hpp"

namespace aqp {

struct DeviceSpec {
  DeviceId device_id = 0;
  std::string pool = "cpu";
  double total_mem = 1.0;
  double speed_factor = 1.0;  // multiplier on UDF cost
};

// Discrete-event clock. Time is in milliseconds (one tick == 1 ms); events at
// equal time fire in scheduling order.
class VirtualClock {
 public:
  using Callback = std::function<void()>;

  struct Fired {
    double time;
    std::uint64_t sequence;
  };

  double now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  double next_time() const;

  // Schedules cb at max(time, now). Returns its sequence number.
  std::uint64_t schedule(double time, Callback cb);

  // Fires every event with time <= to_time, in (time, sequence) order, then
  // moves now to to_time.
  std::vector<Fired> advance(double to_time);

  // Fires the earliest event only. Returns false when nothing is pending.
  bool step();

 private:
  struct Item {
    double time;
    std::uint64_t sequence;
    Callback cb;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.sequence > b.sequence;
    }
  };

  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Item, std::vector<Item>, Later> heap_;
};

struct BusyInterval {
  DeviceId device_id = 0;
  double start = 0.0;
  double end = 0.0;
};

struct Utilization {
  double avg = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline constexpr double kDefaultUtilizationWindowMs = 1000.0;

// Busy fraction of one device over [t0, t1). Overlapping intervals (several
// workers on one device) count once. min/max range over `samples` equal
// sub-windows; avg is the fraction over the whole window.
Utilization sample_utilization(const std::vector<BusyInterval>& intervals, DeviceId device,
                               double t0, double t1, std::size_t samples = 10);

struct UtilizationRow {
  double t_start = 0.0;
  double t_end = 0.0;
  DeviceId device_id = 0;
  Utilization u;
};

std::vector<UtilizationRow> utilization_series(const std::vector<BusyInterval>& intervals,
                                               const std::vector<DeviceId>& devices, double horizon,
                                               double window = kDefaultUtilizationWindowMs);

void write_utilization_csv(std::ostream& os, const std::vector<UtilizationRow>& rows);

}  // namespace aqp
