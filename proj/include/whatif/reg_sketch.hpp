#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "whatif/core.hpp"
#include "whatif/leverage.hpp"

namespace whatif {

struct RegConfig {
  double epsilon = 0.5;
  double delta = 0.1;
  std::uint64_t seed = 0;
  double constant = 16.0;  // C in t = C eps^-1 k d log2(max(d,2)) (k + log2(1/delta))
  std::optional<std::size_t> sample_override;

  std::size_t sample_count(std::size_t k, std::size_t d) const;
  void check() const;
};

// Per-hypothetical sampling distributions p_{i,j} = L_{i,j} / rank_i, keyed by position.
struct HypLeverage {
  Eigen::Index rank = 0;
  std::vector<std::size_t> positions;
  Eigen::VectorXd probabilities;
};

std::vector<HypLeverage> leverage_profiles(const RegInstance& inst,
                                           const std::vector<std::vector<std::size_t>>& members);

// Rates stored as numerators over n: ceil(p * n), never zero for member rows.
std::uint32_t quantize_rate(double p, std::size_t n);

struct RegSample {
  TupleId id = 0;
  Eigen::VectorXd features;
  double target = 0.0;
  std::vector<std::uint32_t> rates;  // per hypothetical, units of 1/n

  bool operator==(const RegSample& o) const;
};

class RegSketch {
 public:
  RegSketch() = default;

  // Throws DegenerateHypothetical when a non-empty hypothetical has rank 0.
  static RegSketch compress(const RegInstance& inst, const HypotheticalSet& h, const RegConfig& cfg);

  // Two-phase resampling followed by a minimum-norm least-squares solve.
  Eigen::VectorXd solve(const Scenario& s) const;
  // The rescaled t x d system the solve runs on.
  void resample(const Scenario& s, Eigen::MatrixXd& a, Eigen::VectorXd& b) const;

  std::size_t k() const { return k_; }
  std::size_t n() const { return n_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t sample_count() const { return t_; }
  const std::vector<std::vector<std::uint16_t>>& permutations() const { return perms_; }
  const std::vector<std::vector<RegSample>>& samples() const { return samples_; }

  bool operator==(const RegSketch&) const = default;

 private:
  friend struct SketchCodec;

  std::size_t k_ = 0;
  std::size_t n_ = 0;
  Eigen::Index dim_ = 0;
  std::size_t t_ = 0;
  std::vector<std::vector<std::uint16_t>> perms_;
  std::vector<std::vector<RegSample>> samples_;
};

// Exact scheme for pairwise disjoint hypotheticals: per-hypothetical Gram matrix and moment.
class DisjointRegSketch {
 public:
  DisjointRegSketch() = default;

  // Throws NotDisjoint.
  static DisjointRegSketch compress(const RegInstance& inst, const HypotheticalSet& h);

  Eigen::VectorXd solve(const Scenario& s) const;

  std::size_t k() const { return gram_.size(); }
  Eigen::Index dim() const { return dim_; }
  const std::vector<Eigen::MatrixXd>& gram() const { return gram_; }
  const std::vector<Eigen::VectorXd>& moment() const { return moment_; }

  bool operator==(const DisjointRegSketch& o) const;

 private:
  friend struct SketchCodec;

  Eigen::Index dim_ = 0;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<Eigen::VectorXd> moment_;
};

}  // namespace whatif
