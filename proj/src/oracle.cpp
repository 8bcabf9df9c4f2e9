#include "aqp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include "aqp/core.hpp"

namespace aqp::oracle {

double completion_time(const TwoStageScenario& s) {
  double end = 0.0;
  double second_free = 0.0;
  for (std::size_t i = 1; i <= s.n_items; ++i) {
    const double first_done = static_cast<double>(i) * s.cost_first;
    end = std::max(end, first_done);
    if (i - 1 < s.pass_mask.size() && s.pass_mask[i - 1]) {
      second_free = std::max(second_free, first_done) + s.cost_second;
      end = std::max(end, second_free);
    }
  }
  return end;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace

std::vector<bool> mask_from_positions(std::size_t n, const std::vector<std::size_t>& positions) {
  std::vector<bool> m(n, false);
  for (auto p : positions) {
    if (p >= 1 && p <= n) m[p - 1] = true;
  }
  return m;
}

std::vector<std::vector<bool>> masks_with(std::size_t n, std::size_t k, std::size_t limit, std::uint64_t seed) {
  std::vector<std::vector<bool>> out;
  if (k > n) return out;
  if (binomial(n, k) <= static_cast<double>(limit)) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<bool> m(n, false);
      for (auto i : idx) m[i] = true;
      out.push_back(std::move(m));
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  std::set<std::vector<bool>> seen;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  while (out.size() < limit) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<bool> m(n, false);
    for (std::size_t i = 0; i < k; ++i) m[perm[i]] = true;
    if (seen.insert(m).second) out.push_back(std::move(m));
  }
  return out;
}

int first_of(Order order, const Predicate2& a, const Predicate2& b) {
  double ka = 0.0;
  double kb = 0.0;
  switch (order) {
    case Order::CostFirst:
      ka = a.cost;
      kb = b.cost;
      break;
    case Order::SelectivityFirst:
      ka = a.selectivity;
      kb = b.selectivity;
      break;
    case Order::ScoreFirst:
      ka = score(a.cost, a.selectivity);
      kb = score(b.cost, b.selectivity);
      break;
  }
  return kb < ka ? 1 : 0;
}

namespace {

std::vector<double> times_for(const Predicate2& first, const Predicate2& second, std::size_t n,
                              std::size_t limit, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(std::llround(first.selectivity * static_cast<double>(n)));
  std::vector<double> t;
  for (auto& m : masks_with(n, std::min(k, n), limit, seed)) {
    t.push_back(completion_time(TwoStageScenario{n, first.cost, second.cost, m}));
  }
  return t;
}

}  // namespace

SpeedupStats speedup(const Predicate2& a, const Predicate2& b, Order alt, std::size_t n_items,
                     std::size_t mask_limit, std::uint64_t seed) {
  const int cf = first_of(Order::CostFirst, a, b);
  const int af = first_of(alt, a, b);
  const Predicate2& c1 = cf == 0 ? a : b;
  const Predicate2& c2 = cf == 0 ? b : a;
  const Predicate2& a1 = af == 0 ? a : b;
  const Predicate2& a2 = af == 0 ? b : a;
  const std::vector<double> tc = times_for(c1, c2, n_items, mask_limit, seed);
  SpeedupStats s;
  auto [cmin, cmax] = std::minmax_element(tc.begin(), tc.end());
  s.cost_first_min = *cmin;
  s.cost_first_max = *cmax;
  if (cf == af) {
    s.alt_min = *cmin;
    s.alt_max = *cmax;
    return s;
  }
  const std::vector<double> ta = times_for(a1, a2, n_items, mask_limit, seed + 1);
  auto [amin, amax] = std::minmax_element(ta.begin(), ta.end());
  s.alt_min = *amin;
  s.alt_max = *amax;
  s.min = *amin / *cmax;
  s.max = *amax / *cmin;
  double inv = 0.0;
  for (double t : tc) inv += 1.0 / t;
  double sum_alt = 0.0;
  for (double t : ta) sum_alt += t;
  s.mean = (sum_alt / static_cast<double>(ta.size())) * (inv / static_cast<double>(tc.size()));
  return s;
}

std::vector<GridCell> policy_dominates(double cost_a, double cost_b, const std::vector<double>& sel_a,
                                       const std::vector<double>& sel_b, std::size_t n_items,
                                       std::size_t mask_limit, std::uint64_t seed) {
  std::vector<GridCell> grid;
  for (double sb : sel_b) {
    for (double sa : sel_a) {
      Predicate2 a{cost_a, sa};
      Predicate2 b{cost_b, sb};
      GridCell c;
      c.sel_a = sa;
      c.sel_b = sb;
      c.vs_selectivity = speedup(a, b, Order::SelectivityFirst, n_items, mask_limit, seed);
      c.vs_score = speedup(a, b, Order::ScoreFirst, n_items, mask_limit, seed);
      grid.push_back(c);
    }
  }
  return grid;
}

void write_grid_csv(std::ostream& os, const std::vector<GridCell>& grid) {
  os << "sel_a,sel_b,vs_selectivity_min,vs_selectivity_mean,vs_selectivity_max,vs_score_min,vs_score_mean,"
        "vs_score_max\n";
  for (const auto& c : grid) {
    os << c.sel_a << ',' << c.sel_b << ',' << c.vs_selectivity.min << ',' << c.vs_selectivity.mean << ','
       << c.vs_selectivity.max << ',' << c.vs_score.min << ',' << c.vs_score.mean << ',' << c.vs_score.max
       << '\n';
  }
}

}  // namespace aqp::oracle
