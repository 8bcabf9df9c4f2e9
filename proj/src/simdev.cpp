#include "aqp/simdev.hpp"

#include <algorithm>
#include <limits>

namespace aqp {

double VirtualClock::next_time() const {
  return heap_.empty() ? std::numeric_limits<double>::infinity() : heap_.top().time;
}

std::uint64_t VirtualClock::schedule(double time, Callback cb) {
  std::uint64_t seq = next_seq_++;
  heap_.push(Item{std::max(time, now_), seq, std::move(cb)});
  return seq;
}

bool VirtualClock::step() {
  if (heap_.empty()) return false;
  Item item = heap_.top();
  heap_.pop();
  now_ = item.time;
  item.cb();
  return true;
}

std::vector<VirtualClock::Fired> VirtualClock::advance(double to_time) {
  std::vector<Fired> fired;
  while (!heap_.empty() && heap_.top().time <= to_time) {
    Item item = heap_.top();
    heap_.pop();
    now_ = item.time;
    fired.push_back({item.time, item.sequence});
    item.cb();
  }
  now_ = std::max(now_, to_time);
  return fired;
}

namespace {

// Length of the union of intervals clipped to [t0, t1).
double covered(std::vector<std::pair<double, double>> spans, double t0, double t1) {
  std::sort(spans.begin(), spans.end());
  double total = 0.0;
  double cur_lo = 0.0;
  double cur_hi = -std::numeric_limits<double>::infinity();
  for (auto [lo, hi] : spans) {
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (hi <= lo) continue;
    if (lo > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

Utilization sample_utilization(const std::vector<BusyInterval>& intervals, DeviceId device,
                               double t0, double t1, std::size_t samples) {
  Utilization u;
  if (t1 <= t0) return u;
  std::vector<std::pair<double, double>> spans;
  for (const auto& iv : intervals) {
    if (iv.device_id == device && iv.end > t0 && iv.start < t1) spans.emplace_back(iv.start, iv.end);
  }
  u.avg = covered(spans, t0, t1) / (t1 - t0);
  samples = std::max<std::size_t>(samples, 1);
  u.min = std::numeric_limits<double>::infinity();
  u.max = 0.0;
  const double step = (t1 - t0) / static_cast<double>(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    double a = t0 + step * static_cast<double>(i);
    double b = i + 1 == samples ? t1 : a + step;
    double f = covered(spans, a, b) / (b - a);
    u.min = std::min(u.min, f);
    u.max = std::max(u.max, f);
  }
  return u;
}

std::vector<UtilizationRow> utilization_series(const std::vector<BusyInterval>& intervals,
                                               const std::vector<DeviceId>& devices, double horizon,
                                               double window) {
  std::vector<UtilizationRow> rows;
  if (window <= 0.0) return rows;
  for (double t = 0.0; t < horizon; t += window) {
    double end = std::min(t + window, horizon);
    for (DeviceId d : devices) rows.push_back({t, end, d, sample_utilization(intervals, d, t, end)});
  }
  return rows;
}

void write_utilization_csv(std::ostream& os, const std::vector<UtilizationRow>& rows) {
  os << "t_start,t_end,device_id,avg,min,max\n";
  for (const auto& r : rows) {
    os << r.t_start << ',' << r.t_end << ',' << r.device_id << ',' << r.u.avg << ',' << r.u.min << ','
       << r.u.max << '\n';
  }
}

}  // namespace aqp
