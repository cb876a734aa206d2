#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "whatif/oracle.hpp"
#include "whatif/qtl_sketch.hpp"

using namespace whatif;

namespace {

Instance weighted(std::vector<double> weights) {
  std::vector<Tuple> t;
  for (std::size_t i = 0; i < weights.size(); ++i) t.push_back(Tuple{i + 1, weights[i], "R", {}});
  return Instance(t);
}

}  // namespace

TEST(QtlConfigTest, DerivedConstants) {
  const QtlConfig c{0.25, 0.1, 0, std::nullopt};
  EXPECT_DOUBLE_EQ(c.eps_prime(), 0.05);
  const double expect = 12.0 / 0.0025 * (std::log2(30.0) + 10.0 + std::log2(10000.0));
  EXPECT_EQ(c.sample_target(5, 10000), static_cast<std::size_t>(std::ceil(expect)));
}

TEST(QtlSketchTest, ExhaustivePrefixHoldsSmallestTuples) {
  const Instance inst = weighted({5, 1, 4, 2, 3});
  const auto sk = QtlSketch::compress(inst, fixtures::hyps({{1, 2, 3, 4, 5}}), QtlConfig{0.25, 0.1, 0, std::nullopt});
  ASSERT_EQ(sk.prefix(0).size(), 5u);
  std::vector<double> weights;
  for (const auto& r : sk.prefix(0)) weights.push_back(r.weight);
  EXPECT_EQ(weights, (std::vector<double>{1, 2, 3, 4, 5}));
  EXPECT_TRUE(sk.sampled().empty());
  const auto top = sk.quantile(Scenario::parse("1"), 1.0);
  EXPECT_EQ(top.tuple.weight, 5.0);
  EXPECT_EQ(top.tuple.id, 1u);
}

TEST(QtlSketchTest, SharedTupleHasSameCharVector) {
  const Instance inst = weighted({3, 1, 2});
  const auto sk = QtlSketch::compress(inst, fixtures::hyps({{1, 2}, {1, 3}, {3}}), QtlConfig{0.25, 0.1, 0, std::nullopt});
  auto find = [&](std::size_t i, TupleId id) {
    for (const auto& r : sk.prefix(i))
      if (r.id == id) return r;
    ADD_FAILURE();
    return QtlRecord{};
  };
  const QtlRecord a = find(0, 1), b = find(1, 1);
  EXPECT_EQ(a.membership, b.membership);
  EXPECT_TRUE(a.membership.test(0));
  EXPECT_TRUE(a.membership.test(1));
  EXPECT_FALSE(a.membership.test(2));
}

TEST(QtlSketchTest, SampledListsRespectCap) {
  const auto w = fixtures::random_workload(5000, 4, 2, 0.4);
  const Instance inst(w.tuples);
  const auto sk = QtlSketch::compress(inst, w.hyps, QtlConfig{0.25, 0.1, 2, 40});
  EXPECT_FALSE(sk.sampled().empty());
  for (const auto& [j, lists] : sk.sampled()) {
    EXPECT_GT(sk.grid_rank(j), 40.0);
    for (std::size_t i = 0; i < lists.size(); ++i) {
      EXPECT_LE(lists[i].size(), sk.keep());
      EXPECT_TRUE(std::is_sorted(lists[i].begin(), lists[i].end(), rank_less));
      for (const auto& r : lists[i]) EXPECT_TRUE(r.membership.test(i));
    }
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LE(sk.prefix(i).size(), 40u);
}

TEST(QtlSketchTest, SamplingRateMatchesTarget) {
  // Untruncated portions of the sampled lists should keep a tuple with probability t / r_j.
  const std::size_t n = 4000, t = 30;
  std::vector<TupleId> all;
  for (TupleId i = 1; i <= n; ++i) all.push_back(i);
  std::vector<double> weights;
  for (std::size_t i = 0; i < n; ++i) weights.push_back(static_cast<double>(i + 1));
  const Instance inst = weighted(weights);
  double kept = 0, expected = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto sk = QtlSketch::compress(inst, fixtures::hyps({all}), QtlConfig{0.25, 0.1, seed, t});
    for (const auto& [j, lists] : sk.sampled()) {
      const auto& list = lists[0];
      if (list.empty()) continue;
      // Only the prefix of weights up to the last recorded tuple was scanned.
      const double scanned = list.size() < sk.keep() ? static_cast<double>(n) : list.back().weight;
      kept += static_cast<double>(list.size());
      expected += scanned * static_cast<double>(t) / sk.grid_rank(j);
    }
  }
  EXPECT_NEAR(kept / expected, 1.0, 0.05);
}

TEST(QtlSketchTest, DuplicateHypotheticalsDeduplicate) {
  const auto w = fixtures::random_workload(3000, 1, 4, 0.6);
  const auto twice = fixtures::hyps({std::vector<TupleId>(w.hyps.members(0).begin(), w.hyps.members(0).end()),
                               std::vector<TupleId>(w.hyps.members(0).begin(), w.hyps.members(0).end())});
  const Instance inst(w.tuples);
  const auto sk = QtlSketch::compress(inst, twice, QtlConfig{0.25, 0.1, 4, 25});
  for (double phi : {0.1, 0.5, 0.9, 1.0}) {
    const auto one = sk.quantile(Scenario::parse("1"), phi);
    const auto both = sk.quantile(Scenario::parse("1,2"), phi);
    EXPECT_EQ(one.tuple.id, both.tuple.id);
  }
}

TEST(QtlSketchTest, ExhaustiveBranchIsExact) {
  const auto w = fixtures::random_workload(400, 4, 7, 0.3);
  const Instance inst(w.tuples);
  const auto sk = QtlSketch::compress(inst, w.hyps, QtlConfig{0.25, 0.1, 7, std::nullopt});
  ASSERT_GE(sk.sample_target(), 400u);
  for (const Scenario& s : all_scenarios(4))
    for (double phi : {0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const auto got = sk.quantile(s, phi);
      const auto want = oracle::quantile(inst, w.hyps, s, phi);
      EXPECT_EQ(got.tuple.id, want.tuple.id);
      EXPECT_EQ(got.rank, static_cast<double>(want.rank));
      EXPECT_FALSE(got.degraded);
    }
}

TEST(QtlSketchTest, SampledBranchAccuracy) {
  std::size_t good = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto w = fixtures::random_workload(6000, 3, seed, 0.5);
    const Instance inst(w.tuples);
    const QtlConfig cfg{0.25, 0.1, seed, 400};
    const auto sk = QtlSketch::compress(inst, w.hyps, cfg);
    for (const Scenario& s : all_scenarios(3))
      for (double phi : {0.2, 0.5, 0.8, 1.0}) {
        const auto got = sk.quantile(s, phi);
        const auto want = oracle::quantile(inst, w.hyps, s, phi);
        const double rank = static_cast<double>(oracle::rank_of_tuple(inst, w.hyps, s, got.tuple.id));
        ++total;
        good += std::abs(rank - static_cast<double>(want.rank)) <= cfg.epsilon * static_cast<double>(want.rank);
      }
  }
  EXPECT_GE(static_cast<double>(good), 0.9 * static_cast<double>(total));
}

TEST(QtlSketchTest, RankOfExtremes) {
  const auto w = fixtures::random_workload(2000, 3, 12, 0.5);
  const Instance inst(w.tuples);
  const auto sk = QtlSketch::compress(inst, w.hyps, QtlConfig{0.25, 0.1, 12, 150});
  for (const Scenario& s : all_scenarios(3)) {
    const auto sorted = oracle::sorted_result(inst, w.hyps, s);
    const auto low = sk.rank_of(s, sorted.front().weight);
    EXPECT_EQ(low.rank, 1.0);
    EXPECT_EQ(low.nearest.id, sorted.front().id);
    const auto high = sk.rank_of(s, 1e9);
    const double n = static_cast<double>(sorted.size());
    EXPECT_NEAR(high.rank, n, 0.25 * n);
  }
}

TEST(QtlSketchTest, RejectsBadPhiAndEmptyScenarios) {
  const Instance inst = weighted({1, 2, 3});
  const auto sk = QtlSketch::compress(inst, fixtures::hyps({{1, 2}, {}}), QtlConfig{0.25, 0.1, 0, std::nullopt});
  EXPECT_THROW(sk.quantile(Scenario::parse("1"), 0.0), Error);
  EXPECT_THROW(sk.quantile(Scenario::parse("1"), 1.5), Error);
  try {
    sk.quantile(Scenario::parse("2"), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScenarioResult);
  }
}

TEST(QtlOracle, RankConventions) {
  const Instance inst = weighted({1, 2, 3, 4});
  const auto h = fixtures::hyps({{1, 2, 3, 4}});
  const Scenario s = Scenario::parse("1");
  EXPECT_EQ(oracle::quantile(inst, h, s, 0.5).rank, 2u);
  EXPECT_EQ(oracle::quantile(inst, h, s, 0.5).tuple.weight, 2.0);
  EXPECT_EQ(oracle::rank_of(inst, h, s, 2.5), 2u);
  EXPECT_EQ(oracle::rank_of(inst, h, s, 4.0), 4u);
}

TEST(CeilRank, IgnoresFloatNoise) {
  EXPECT_EQ(ceil_rank(0.1 * 30.0), 3u);  // 3.0000000000000004
  EXPECT_EQ(ceil_rank(3.2), 4u);
  EXPECT_EQ(ceil_rank(0.0), 1u);
}
