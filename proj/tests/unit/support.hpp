#pragma once

#include <random>
#include <vector>

#include "whatif/core.hpp"

namespace whatif::fixtures {

struct Workload {
  std::vector<Tuple> tuples;
  HypotheticalSet hyps;
};

// n tuples with ids 1..n; each tuple joins each hypothetical with probability `density`,
// and every hypothetical gets at least one member.
inline Workload random_workload(std::size_t n, std::size_t k, std::uint64_t seed, double density = 0.3,
                                double wmin = 1.0, double wmax = 1000.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> weight(wmin, wmax);
  std::bernoulli_distribution join(density);
  Workload w;
  std::vector<std::vector<TupleId>> members(k);
  for (std::size_t p = 0; p < n; ++p) {
    Tuple t;
    t.id = p + 1;
    t.weight = weight(gen);
    w.tuples.push_back(t);
    for (std::size_t i = 0; i < k; ++i)
      if (join(gen)) members[i].push_back(t.id);
  }
  for (std::size_t i = 0; i < k; ++i)
    if (members[i].empty() && n > 0) members[i].push_back(1 + gen() % n);
  w.hyps = HypotheticalSet(std::move(members));
  return w;
}

struct RegWorkload {
  std::vector<RegRow> rows;
  HypotheticalSet hyps;
  Eigen::VectorXd truth;
};

inline RegWorkload random_reg_workload(std::size_t n, Eigen::Index d, std::size_t k, std::uint64_t seed,
                                       double noise = 1.0, double density = 0.35) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution join(density);
  RegWorkload w;
  w.truth.resize(d);
  for (Eigen::Index c = 0; c < d; ++c) w.truth(c) = normal(gen);
  std::vector<std::vector<TupleId>> members(k);
  for (std::size_t p = 0; p < n; ++p) {
    RegRow r;
    r.id = p + 1;
    r.features.resize(d);
    for (Eigen::Index c = 0; c < d; ++c) r.features(c) = normal(gen);
    r.target = r.features.dot(w.truth) + noise * normal(gen);
    w.rows.push_back(std::move(r));
    for (std::size_t i = 0; i < k; ++i)
      if (join(gen)) members[i].push_back(p + 1);
  }
  for (std::size_t i = 0; i < k; ++i)
    if (members[i].size() < static_cast<std::size_t>(d) + 1)
      for (std::size_t p = 0; p < n && members[i].size() < static_cast<std::size_t>(d) + 1; ++p)
        members[i].push_back(1 + (gen() % n));
  w.hyps = HypotheticalSet(std::move(members));
  return w;
}

// Ids of I|S computed by scanning every tuple against the member lists.
inline std::vector<TupleId> union_by_scan(const std::vector<Tuple>& tuples, const HypotheticalSet& h,
                                          const Scenario& s) {
  std::vector<TupleId> out;
  for (const Tuple& t : tuples) {
    bool in = false;
    for (std::size_t i : s.on())
      for (TupleId m : h.members(i)) in = in || m == t.id;
    if (in) out.push_back(t.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace whatif::fixtures

namespace whatif::fixtures {

inline HypotheticalSet hyps(std::vector<std::vector<TupleId>> members) { return HypotheticalSet(std::move(members)); }

}  // namespace whatif::fixtures
