#include "whatif/sum_sketch.hpp"

#include <cmath>

namespace whatif {

std::size_t SumConfig::prune_depth(std::size_t n) const {
  const double e = eps_prime();
  const double v = std::log(static_cast<double>(std::max<std::size_t>(n, 1)) / e) / std::log1p(e);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(v)));
}

double SumConfig::delta_prime(std::size_t k, std::size_t n) const {
  return delta / (static_cast<double>(k) * static_cast<double>(prune_depth(n) + 1));
}

long long SumConfig::grid_bound(double weight_bound) const {
  return static_cast<long long>(std::ceil(std::log(weight_bound) / std::log1p(eps_prime())));
}

void SumConfig::check() const {
  if (!(epsilon > 0.0 && epsilon < 1.0 + 1e-12))
    throw Error(ErrorCode::InvalidArgument, "epsilon must be in (0,1]");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0,1)");
}

double grid_point(int l, double base) { return std::pow(base, l); }

int bucket_of(double w, double base) {
  int l = static_cast<int>(std::floor(std::log(w) / std::log(base)));
  while (grid_point(l, base) > w) --l;
  while (grid_point(l + 1, base) <= w) ++l;
  return l;
}

PruningPlan plan_pruning(const Instance& inst, const HypotheticalSet& h, const SumConfig& cfg) {
  const double base = cfg.grid_base();
  const auto depth = static_cast<long long>(cfg.prune_depth(inst.size()));
  const auto members = h.positions(inst);

  std::vector<int> bucket(inst.size());
  for (std::size_t p = 0; p < inst.size(); ++p) {
    const double w = inst[p].weight;
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::NonPositiveWeight, "tuple " + std::to_string(inst[p].id));
    bucket[p] = bucket_of(w, base);
  }

  PruningPlan plan;
  plan.top.assign(h.k(), std::nullopt);
  plan.discarded_weight.assign(h.k(), 0.0);
  for (std::size_t i = 0; i < h.k(); ++i) {
    if (members[i].empty()) continue;
    int top = bucket[members[i].front()];
    for (std::size_t p : members[i]) top = std::max(top, bucket[p]);
    plan.top[i] = top;
    const long long floor_bucket = static_cast<long long>(top) - depth;
    for (std::size_t p : members[i]) {
      if (bucket[p] < floor_bucket) {
        plan.discarded_weight[i] += inst[p].weight;
        continue;
      }
      auto [it, fresh] = plan.intervals.try_emplace(bucket[p]);
      if (fresh) it->second.resize(h.k());
      it->second[i].push_back(p);
    }
  }
  return plan;
}

SumSketch SumSketch::compress(const Instance& inst, const HypotheticalSet& h, const SumConfig& cfg) {
  cfg.check();
  PruningPlan plan = plan_pruning(inst, h, cfg);

  SumSketch sk;
  sk.k_ = h.k();
  sk.base_ = cfg.grid_base();
  sk.top_ = plan.top;

  CntConfig inner;
  inner.epsilon = cfg.eps_prime();
  inner.delta = cfg.delta_prime(h.k(), inst.size());
  for (auto& [l, members] : plan.intervals) {
    inner.seed = substream(cfg.seed, {stream::kSum, static_cast<std::uint64_t>(static_cast<std::int64_t>(l))})();
    sk.intervals_.emplace(l, CntSketch::compress(inst.size(), members, inner));
  }
  inner.seed = substream(cfg.seed, {stream::kSum, stream::kCount})();
  sk.total_ = CntSketch::compress(inst, h, inner);
  return sk;
}

double SumSketch::estimate_sum(const Scenario& s) const {
  s.check(k_);
  double total = 0.0;
  for (const auto& [l, cnt] : intervals_) {
    if (cnt.empty_for(s)) continue;
    total += grid_point(l + 1, base_) * static_cast<double>(cnt.estimate(s));
  }
  return total;
}

double SumSketch::estimate_average(const Scenario& s) const {
  const std::uint64_t count = total_.estimate(s);
  if (count == 0) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");
  return estimate_sum(s) / static_cast<double>(count);
}

}  // namespace whatif
