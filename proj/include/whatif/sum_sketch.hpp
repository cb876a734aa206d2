#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "whatif/cnt_sketch.hpp"
#include "whatif/core.hpp"

namespace whatif {

struct SumConfig {
  double epsilon = 0.2;
  double delta = 0.1;
  std::uint64_t seed = 0;

  double eps_prime() const { return epsilon / 4.0; }
  double grid_base() const { return 1.0 + eps_prime(); }
  // Number of buckets kept below each hypothetical's top bucket.
  std::size_t prune_depth(std::size_t n) const;
  double delta_prime(std::size_t k, std::size_t n) const;
  // Exponent bound p = ceil(log_{1+eps'} W); reported, not needed to build the grid.
  long long grid_bound(double weight_bound) const;
  void check() const;
};

// Index l with base^l <= w < base^(l+1), for w > 0.
int bucket_of(double w, double base);
double grid_point(int l, double base);

// Result of bucketing and pruning one instance; shared by compression and tests.
struct PruningPlan {
  std::vector<std::optional<int>> top;                               // per hypothetical
  std::map<int, std::vector<std::vector<std::size_t>>> intervals;    // bucket -> per-hyp positions
  std::vector<double> discarded_weight;                              // per hypothetical
};

PruningPlan plan_pruning(const Instance& inst, const HypotheticalSet& h, const SumConfig& cfg);

// Count sketches layered over a geometric weight grid, plus a full count sketch
// that serves as the denominator of the average.
class SumSketch {
 public:
  SumSketch() = default;

  // Throws NonPositiveWeight.
  static SumSketch compress(const Instance& inst, const HypotheticalSet& h, const SumConfig& cfg);

  double estimate_sum(const Scenario& s) const;
  // Throws EmptyScenarioResult when the count estimate is zero.
  double estimate_average(const Scenario& s) const;
  std::uint64_t estimate_count(const Scenario& s) const { return total_.estimate(s); }

  std::size_t k() const { return k_; }
  double base() const { return base_; }
  const std::vector<std::optional<int>>& top_buckets() const { return top_; }
  const std::map<int, CntSketch>& intervals() const { return intervals_; }
  const CntSketch& total() const { return total_; }

  bool operator==(const SumSketch&) const = default;

 private:
  friend struct SketchCodec;

  std::size_t k_ = 0;
  double base_ = 1.0;
  std::vector<std::optional<int>> top_;
  std::map<int, CntSketch> intervals_;
  CntSketch total_;
};

}  // namespace whatif
