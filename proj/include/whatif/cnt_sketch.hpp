#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "whatif/core.hpp"
#include "whatif/hash.hpp"

namespace whatif {

struct CntConfig {
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  // Replaces ceil(256 / eps^2); only meant for exercising the saturated path at small n.
  std::optional<std::size_t> capacity_override;

  std::size_t capacity() const;              // t
  std::size_t hash_count(std::size_t k) const;  // m = ceil(k + log2(1/delta))
  void check() const;
};

struct TrailEntry {
  std::uint8_t trail = 0;
  std::uint32_t concise = 0;

  bool operator==(const TrailEntry&) const = default;
};

// Per hash function and hypothetical, the t rarest trailing-zero counts (largest trail
// first) over the hypothetical's distinct identifiers, each tagged with a concise
// identifier shared across hypotheticals for that hash function. Lists are stored in
// ascending trail order.
class CntSketch {
 public:
  CntSketch() = default;

  static CntSketch compress(const Instance& inst, const HypotheticalSet& h, const CntConfig& cfg);
  // members hold positions in [0, n); used directly by the layered sketches.
  static CntSketch compress(std::size_t n, const std::vector<std::vector<std::size_t>>& members,
                            const CntConfig& cfg);

  // Median over hash functions of the per-hash estimate; exact when the union is below t.
  // Otherwise, with r the t-th largest trail of the union, the per-hash value is
  // |{trail > r}| * 2^(r+1).
  std::uint64_t estimate(const Scenario& s) const;
  // The per-hash values the median is taken over.
  std::vector<std::uint64_t> per_hash_estimates(const Scenario& s) const;

  std::size_t k() const { return k_; }
  std::size_t capacity() const { return capacity_; }
  unsigned bits() const { return bits_; }
  const std::vector<PairwiseHash>& hashes() const { return hashes_; }
  const std::vector<TrailEntry>& list(std::size_t hash, std::size_t hyp) const {
    return lists_[hash][hyp];
  }
  std::uint32_t concise_count(std::size_t hash) const { return concise_count_[hash]; }
  bool empty_for(const Scenario& s) const;

  bool operator==(const CntSketch&) const = default;

 private:
  friend struct SketchCodec;

  std::size_t k_ = 0;
  std::size_t capacity_ = 0;
  unsigned bits_ = 1;
  std::vector<PairwiseHash> hashes_;
  std::vector<std::vector<std::vector<TrailEntry>>> lists_;  // [hash][hypothetical]
  std::vector<std::uint32_t> concise_count_;                   // [hash]
};

// Lower median (element (m-1)/2 of the sorted values).
std::uint64_t lower_median(std::vector<std::uint64_t> values);

}  // namespace whatif
