#include "whatif/cnt_sketch.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>

namespace whatif {

std::size_t CntConfig::capacity() const {
  if (capacity_override) return *capacity_override;
  return static_cast<std::size_t>(std::ceil(256.0 / (epsilon * epsilon)));
}

std::size_t CntConfig::hash_count(std::size_t k) const {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(k) + std::log2(1.0 / delta)));
}

void CntConfig::check() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0,1)");
  if (capacity() == 0) throw Error(ErrorCode::InvalidArgument, "capacity must be positive");
}

CntSketch CntSketch::compress(const Instance& inst, const HypotheticalSet& h, const CntConfig& cfg) {
  return compress(inst.size(), h.positions(inst), cfg);
}

CntSketch CntSketch::compress(std::size_t n, const std::vector<std::vector<std::size_t>>& members,
                              const CntConfig& cfg) {
  cfg.check();
  CntSketch sk;
  sk.k_ = members.size();
  sk.capacity_ = cfg.capacity();
  sk.bits_ = domain_bits(n);
  sk.hashes_ = draw_family(cfg.seed, cfg.hash_count(sk.k_), sk.bits_);
  sk.lists_.assign(sk.hashes_.size(), std::vector<std::vector<TrailEntry>>(sk.k_));
  sk.concise_count_.assign(sk.hashes_.size(), 0);

  // Rarest first: (L - trail, hashed value, position) is a total order on distinct tuples,
  // so the per-hypothetical truncations compose into the truncation of any union.
  using Key = std::tuple<unsigned, std::uint64_t, std::size_t>;
  std::vector<std::uint64_t> hashed(n);
  std::vector<std::uint32_t> concise(n);
  std::vector<std::vector<Key>> kept(sk.k_);
  for (std::size_t j = 0; j < sk.hashes_.size(); ++j) {
    const PairwiseHash& g = sk.hashes_[j];
    for (std::size_t p = 0; p < n; ++p) hashed[p] = g(p);

    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < sk.k_; ++i) {
      std::vector<Key>& keys = kept[i];
      keys.clear();
      keys.reserve(members[i].size());
      for (std::size_t p : members[i]) keys.emplace_back(sk.bits_ - trail(hashed[p], sk.bits_), hashed[p], p);
      if (keys.size() > sk.capacity_) {
        std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(sk.capacity_), keys.end());
        keys.resize(sk.capacity_);
      }
      std::sort(keys.begin(), keys.end());
      for (const Key& key : keys) touched.push_back(std::get<2>(key));
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::size_t c = 0; c < touched.size(); ++c) concise[touched[c]] = static_cast<std::uint32_t>(c);
    sk.concise_count_[j] = static_cast<std::uint32_t>(touched.size());

    for (std::size_t i = 0; i < sk.k_; ++i) {
      auto& out = sk.lists_[j][i];
      out.reserve(kept[i].size());
      for (auto it = kept[i].rbegin(); it != kept[i].rend(); ++it) {
        const auto& [rarity, hv, p] = *it;
        out.push_back(TrailEntry{static_cast<std::uint8_t>(sk.bits_ - rarity), concise[p]});
      }
    }
  }
  return sk;
}

bool CntSketch::empty_for(const Scenario& s) const {
  if (lists_.empty()) return true;
  for (std::size_t i : s.on())
    if (!lists_[0][i].empty()) return false;
  return true;
}

std::vector<std::uint64_t> CntSketch::per_hash_estimates(const Scenario& s) const {
  s.check(k_);
  std::vector<std::uint64_t> values;
  values.reserve(hashes_.size());
  std::vector<std::uint8_t> seen;
  std::vector<std::uint8_t> trails;
  for (std::size_t j = 0; j < hashes_.size(); ++j) {
    seen.assign(concise_count_[j], 0);
    trails.clear();
    for (std::size_t i : s.on())
      for (const TrailEntry& e : lists_[j][i])
        if (!seen[e.concise]) {
          seen[e.concise] = 1;
          trails.push_back(e.trail);
        }
    if (trails.size() < capacity_) {
      values.push_back(trails.size());
      continue;
    }
    // r is the t-th largest trail; every tuple of I|S with a trail above r is in the union.
    auto nth = trails.begin() + static_cast<std::ptrdiff_t>(capacity_ - 1);
    std::nth_element(trails.begin(), nth, trails.end(), std::greater<>());
    const unsigned r = *nth;
    const auto above = static_cast<std::uint64_t>(
        std::count_if(trails.begin(), trails.end(), [r](std::uint8_t v) { return v > r; }));
    values.push_back(above << (r + 1));
  }
  return values;
}

std::uint64_t CntSketch::estimate(const Scenario& s) const {
  if (hashes_.empty()) return 0;
  return lower_median(per_hash_estimates(s));
}

std::uint64_t lower_median(std::vector<std::uint64_t> values) {
  if (values.empty()) return 0;
  auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

}  // namespace whatif
