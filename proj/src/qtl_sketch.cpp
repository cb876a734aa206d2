#include "whatif/qtl_sketch.hpp"

#include <algorithm>
#include <cmath>

namespace whatif {

std::size_t QtlConfig::sample_target(std::size_t k, std::size_t n) const {
  if (sample_target_override) return *sample_target_override;
  const double e = eps_prime();
  const double logs = std::log2(1.0 / delta_prime()) + 2.0 * static_cast<double>(k) +
                      std::log2(static_cast<double>(std::max<std::size_t>(n, 1)));
  return static_cast<std::size_t>(std::ceil(12.0 / (e * e) * logs));
}

void QtlConfig::check() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must be in (0,1)");
  if (sample_target_override && *sample_target_override == 0)
    throw Error(ErrorCode::InvalidArgument, "sample target must be positive");
}

std::size_t ceil_rank(double r) {
  const double c = std::ceil(r - 1e-9 * std::max(1.0, std::abs(r)));
  return c < 1.0 ? 1 : static_cast<std::size_t>(c);
}

double QtlSketch::grid_rank(std::size_t j) const { return std::pow(base_, static_cast<double>(j)); }

QtlSketch QtlSketch::compress(const Instance& inst, const HypotheticalSet& h, const QtlConfig& cfg) {
  cfg.check();
  const std::size_t n = inst.size();
  QtlSketch sk;
  sk.k_ = h.k();
  sk.epsilon_ = cfg.epsilon;
  sk.base_ = 1.0 + cfg.eps_prime();
  sk.t_ = cfg.sample_target(h.k(), n);
  sk.keep_ = static_cast<std::size_t>(std::ceil((1.0 + 3.0 * cfg.eps_prime()) * static_cast<double>(sk.t_)));
  sk.grid_top_ = n <= 1 ? 0
                        : static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)) / std::log(sk.base_)));

  CntConfig cnt;
  cnt.epsilon = cfg.eps_prime();
  cnt.delta = cfg.delta_prime();
  cnt.seed = substream(cfg.seed, {stream::kQuantile, stream::kCount})();
  const auto members = h.positions(inst);
  sk.count_ = CntSketch::compress(n, members, cnt);

  const auto masks = memberships(n, members);
  auto record = [&](std::size_t p) { return QtlRecord{inst[p].id, inst[p].weight, masks[p]}; };
  auto by_rank = [&](std::size_t a, std::size_t b) {
    return inst[a].weight < inst[b].weight || (inst[a].weight == inst[b].weight && inst[a].id < inst[b].id);
  };

  std::vector<std::vector<std::size_t>> ordered = members;
  for (auto& m : ordered) std::sort(m.begin(), m.end(), by_rank);

  sk.prefix_.resize(sk.k_);
  for (std::size_t i = 0; i < sk.k_; ++i) {
    const std::size_t len = std::min(ordered[i].size(), sk.t_);
    for (std::size_t r = 0; r < len; ++r) sk.prefix_[i].push_back(record(ordered[i][r]));
  }

  for (std::size_t j = 0; j <= sk.grid_top_; ++j) {
    const double rj = sk.grid_rank(j);
    if (rj <= static_cast<double>(sk.t_)) continue;
    auto& lists = sk.sampled_[j];
    lists.resize(sk.k_);
    std::bernoulli_distribution coin(static_cast<double>(sk.t_) / rj);
    for (std::size_t i = 0; i < sk.k_; ++i) {
      std::mt19937_64 gen = substream(cfg.seed, {stream::kQuantile, i, j});
      for (std::size_t p : ordered[i]) {
        if (lists[i].size() >= sk.keep_) break;
        if (coin(gen)) lists[i].push_back(record(p));
      }
    }
  }
  return sk;
}

std::size_t QtlSketch::grid_index(double target_rank) const {
  std::size_t j = 0;
  while (j < grid_top_ && grid_rank(j + 1) <= target_rank) ++j;
  return j;
}

QuantileAnswer QtlSketch::select(const Scenario& s, double target_rank) const {
  s.check(k_);
  const HypMask on(k_, s);
  bool any = false;
  for (std::size_t i : s.on()) any = any || !prefix_[i].empty();
  if (!any) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");

  // Keep a record only at the smallest turned-on hypothetical that contains it.
  auto collect = [&](const std::vector<std::vector<QtlRecord>>& lists) {
    std::vector<const QtlRecord*> out;
    for (std::size_t i : s.on())
      for (const QtlRecord& x : lists[i])
        if (x.membership.first_common(on) == i) out.push_back(&x);
    std::sort(out.begin(), out.end(), [](const QtlRecord* a, const QtlRecord* b) { return rank_less(*a, *b); });
    return out;
  };

  const std::size_t gamma = grid_index(target_rank);
  const double r_gamma = grid_rank(gamma);
  QuantileAnswer ans;
  if (r_gamma <= static_cast<double>(t_)) {
    const std::size_t want = std::min(ceil_rank(target_rank), t_);
    const auto pool = collect(prefix_);
    if (pool.size() < want) {
      ans.tuple = *pool.back();
      ans.rank = static_cast<double>(pool.size());
      ans.degraded = true;
    } else {
      ans.tuple = *pool[want - 1];
      ans.rank = static_cast<double>(want);
    }
    return ans;
  }

  const auto pool = collect(sampled_.at(gamma));
  if (pool.empty())
    throw Error(ErrorCode::EmptyScenarioResult, "no sampled tuple at rank " + std::to_string(r_gamma));
  ans.rank = r_gamma;
  if (pool.size() < t_) {
    ans.tuple = *pool.back();
    ans.degraded = true;
  } else {
    ans.tuple = *pool[t_ - 1];
  }
  return ans;
}

QuantileAnswer QtlSketch::quantile(const Scenario& s, double phi) const {
  if (!(phi > 0.0 && phi <= 1.0)) throw Error(ErrorCode::InvalidArgument, "phi must lie in (0, 1]");
  s.check(k_);
  const std::uint64_t n_est = count_.estimate(s);
  if (n_est == 0) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");
  return select(s, phi * static_cast<double>(n_est));
}

RankAnswer QtlSketch::rank_of(const Scenario& s, double x) const {
  s.check(k_);
  const std::uint64_t n_est = count_.estimate(s);
  if (n_est == 0) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");

  std::vector<double> probes;
  const double step = 1.0 + epsilon_;
  for (double r = 1.0; r < static_cast<double>(n_est); r *= step) probes.push_back(r);
  probes.push_back(static_cast<double>(n_est));

  RankAnswer best;
  bool have = false;
  for (double r : probes) {
    const QuantileAnswer q = select(s, r);
    const double dist = std::abs(q.tuple.weight - x);
    const double best_dist = std::abs(best.nearest.weight - x);
    if (!have || dist < best_dist || (dist == best_dist && q.tuple.weight < best.nearest.weight)) {
      best.rank = q.rank;
      best.nearest = q.tuple;
      best.degraded = q.degraded;
      have = true;
    }
  }
  return best;
}

}  // namespace whatif
