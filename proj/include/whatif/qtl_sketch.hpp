#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "whatif/cnt_sketch.hpp"
#include "whatif/core.hpp"

namespace whatif {

struct QtlConfig {
  double epsilon = 0.25;
  double delta = 0.1;
  std::uint64_t seed = 0;
  // Replaces the derived sample target t; lets small instances reach the sampled branch.
  std::optional<std::size_t> sample_target_override;

  double eps_prime() const { return epsilon / 5.0; }
  double delta_prime() const { return delta / 3.0; }
  std::size_t sample_target(std::size_t k, std::size_t n) const;
  void check() const;
};

// A recorded tuple with its characteristic vector over the hypotheticals.
struct QtlRecord {
  TupleId id = 0;
  double weight = 0.0;
  HypMask membership;

  bool operator==(const QtlRecord&) const = default;
};

// Total order used for ranks: weight, then id.
inline bool rank_less(const QtlRecord& a, const QtlRecord& b) {
  return a.weight < b.weight || (a.weight == b.weight && a.id < b.id);
}

struct QuantileAnswer {
  QtlRecord tuple;
  double rank = 0.0;      // rank the sketch believes the tuple has
  bool degraded = false;  // fewer tuples available than the target needed
};

struct RankAnswer {
  double rank = 0.0;
  QtlRecord nearest;
  bool degraded = false;
};

// Rank grid r_j = (1+eps')^j. Lists for r_j <= t are prefixes of the per-hypothetical
// sorted order, so a single prefix of length min(|h_i|, t) holds all of them.
// Lists for r_j > t are Bernoulli(t / r_j) samples truncated to ceil((1+3eps') t).
class QtlSketch {
 public:
  QtlSketch() = default;

  static QtlSketch compress(const Instance& inst, const HypotheticalSet& h, const QtlConfig& cfg);

  // Throws EmptyScenarioResult; phi must lie in (0, 1].
  QuantileAnswer quantile(const Scenario& s, double phi) const;
  // Estimated rank of the recorded tuple closest in weight to x (ties to the lower weight).
  RankAnswer rank_of(const Scenario& s, double x) const;
  // Selection at an arbitrary target rank.
  QuantileAnswer select(const Scenario& s, double target_rank) const;

  std::size_t k() const { return k_; }
  std::size_t sample_target() const { return t_; }
  std::size_t keep() const { return keep_; }
  std::size_t grid_top() const { return grid_top_; }
  double grid_rank(std::size_t j) const;
  const CntSketch& count() const { return count_; }
  const std::vector<QtlRecord>& prefix(std::size_t i) const { return prefix_[i]; }
  const std::map<std::size_t, std::vector<std::vector<QtlRecord>>>& sampled() const { return sampled_; }

  bool operator==(const QtlSketch&) const = default;

 private:
  friend struct SketchCodec;

  std::size_t grid_index(double target_rank) const;

  std::size_t k_ = 0;
  double epsilon_ = 0.0;
  double base_ = 1.0;
  std::size_t t_ = 0;
  std::size_t keep_ = 0;
  std::size_t grid_top_ = 0;
  CntSketch count_;
  std::vector<std::vector<QtlRecord>> prefix_;
  std::map<std::size_t, std::vector<std::vector<QtlRecord>>> sampled_;
};

// ceil() that ignores floating-point noise just above an integer.
std::size_t ceil_rank(double r);

}  // namespace whatif
