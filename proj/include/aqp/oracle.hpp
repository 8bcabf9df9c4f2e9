#pragma once

// Per-item schedule model of a two-predicate pipeline: the first stage runs
// items serially, survivors queue FIFO for a second serial stage on its own
// resource.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aqp::oracle {

struct TwoStageScenario {
  std::size_t n_items = 0;
  double cost_first = 0.0;
  double cost_second = 0.0;
  std::vector<bool> pass_mask;  // survivors of the first stage; size n_items
};

double completion_time(const TwoStageScenario& s);

// Every size-n mask with exactly k set bits, in lexicographic order of the
// set positions, or `limit` distinct seeded samples when there are more.
std::vector<std::vector<bool>> masks_with(std::size_t n, std::size_t k, std::size_t limit = 20000,
                                          std::uint64_t seed = 1);

// 1-based positions to a mask.
std::vector<bool> mask_from_positions(std::size_t n, const std::vector<std::size_t>& positions);

struct Predicate2 {
  double cost = 0.0;
  double selectivity = 0.0;
};

enum class Order { CostFirst, SelectivityFirst, ScoreFirst };

// Index (0 = A, 1 = B) of the predicate the order runs first; ties go to A.
int first_of(Order order, const Predicate2& a, const Predicate2& b);

struct SpeedupStats {
  double min = 1.0;
  double max = 1.0;
  double mean = 1.0;
  double cost_first_min = 0.0;
  double cost_first_max = 0.0;
  double alt_min = 0.0;
  double alt_max = 0.0;
};

// Speedup of cost-first over `alt` (alt time / cost-first time) across all
// pass masks consistent with the selectivities. Identical orders pair masks
// one to one, giving exactly 1.
SpeedupStats speedup(const Predicate2& a, const Predicate2& b, Order alt, std::size_t n_items,
                     std::size_t mask_limit = 20000, std::uint64_t seed = 1);

struct GridCell {
  double sel_a = 0.0;
  double sel_b = 0.0;
  SpeedupStats vs_selectivity;
  SpeedupStats vs_score;
};

std::vector<GridCell> policy_dominates(double cost_a, double cost_b, const std::vector<double>& sel_a,
                                       const std::vector<double>& sel_b, std::size_t n_items,
                                       std::size_t mask_limit = 20000, std::uint64_t seed = 1);

void write_grid_csv(std::ostream& os, const std::vector<GridCell>& grid);

}  // namespace aqp::oracle
