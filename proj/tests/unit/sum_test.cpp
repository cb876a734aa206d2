#include <gtest/gtest.h>

#include "support.hpp"
#include "whatif/oracle.hpp"
#include "whatif/sum_sketch.hpp"

using namespace whatif;

namespace {

// Bucket by repeated multiplication, independent of logarithms.
int bucket_by_walk(double w, double base) {
  int l = 0;
  double lo = 1.0;
  while (lo > w) {
    lo /= base;
    --l;
  }
  while (lo * base <= w) {
    lo *= base;
    ++l;
  }
  return l;
}

Instance weighted(std::vector<double> weights) {
  std::vector<Tuple> t;
  for (std::size_t i = 0; i < weights.size(); ++i) t.push_back(Tuple{i + 1, weights[i], "R", {}});
  return Instance(t);
}

}  // namespace

TEST(SumGrid, FiveLandsInBucketSeven) {
  EXPECT_EQ(bucket_of(5.0, 1.25), 7);
  EXPECT_EQ(bucket_by_walk(5.0, 1.25), 7);
  EXPECT_NEAR(grid_point(8, 1.25), 5.9604644775390625, 1e-12);
}

TEST(SumGrid, BucketMatchesWalk) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> logw(-6.0, 7.0);
  for (double base : {1.05, 1.25, 1.0125}) {
    for (int i = 0; i < 2000; ++i) {
      const double w = std::exp(logw(gen));
      const int l = bucket_of(w, base);
      EXPECT_EQ(l, bucket_by_walk(w, base));
      EXPECT_LE(grid_point(l, base), w);
      EXPECT_LT(w, grid_point(l + 1, base));
    }
    for (int l = -20; l < 40; ++l) EXPECT_EQ(bucket_of(grid_point(l, base), base), l);
  }
}

TEST(SumConfigTest, DerivedConstants) {
  const SumConfig c{0.2, 0.1, 0};
  EXPECT_DOUBLE_EQ(c.eps_prime(), 0.05);
  // ceil(log_{1.05}(10^4 / 0.05)) = ceil(250.17)
  EXPECT_EQ(c.prune_depth(10000), 251u);
  EXPECT_DOUBLE_EQ(c.delta_prime(6, 10000), 0.1 / (6.0 * 252.0));
  EXPECT_EQ(c.grid_bound(1000.0), 142);
}

TEST(SumSketchTest, SingleTupleEstimateIsUpperGridPoint) {
  const Instance inst = weighted({5.0});
  const auto sk = SumSketch::compress(inst, fixtures::hyps({{1}}), SumConfig{1.0, 0.1, 0});
  ASSERT_EQ(sk.top_buckets()[0], 7);
  const double est = sk.estimate_sum(Scenario::parse("1"));
  EXPECT_NEAR(est, std::pow(1.25, 8), 1e-9);
  EXPECT_LE(est, 5.0 * 1.25 * 1.25);
  EXPECT_NEAR(sk.estimate_average(Scenario::parse("1")), std::pow(1.25, 8), 1e-9);
}

TEST(SumSketchTest, UnitWeightsUseOneInterval) {
  const Instance inst = weighted(std::vector<double>(50, 1.0));
  std::vector<TupleId> a, b;
  for (TupleId i = 1; i <= 30; ++i) a.push_back(i);
  for (TupleId i = 20; i <= 50; ++i) b.push_back(i);
  const auto h = fixtures::hyps({a, b});
  const SumConfig cfg{0.4, 0.1, 5};
  const auto sk = SumSketch::compress(inst, h, cfg);
  ASSERT_EQ(sk.intervals().size(), 1u);
  EXPECT_EQ(sk.intervals().begin()->first, 0);
  for (const Scenario& s : all_scenarios(2)) {
    const double count = static_cast<double>(sk.estimate_count(s));
    EXPECT_NEAR(sk.estimate_sum(s), cfg.grid_base() * count, 1e-9);
    const double truth = oracle::sum(inst, h, s);
    EXPECT_LE(std::abs(sk.estimate_sum(s) - truth), cfg.epsilon * truth);
  }
}

TEST(SumSketchTest, PruningDropsDeepTuples) {
  const SumConfig cfg{1.0, 0.1, 0};
  const int depth = static_cast<int>(cfg.prune_depth(2));
  const double base = cfg.grid_base();
  const int top = depth + 5;
  const double big = grid_point(top, base) * 1.01;
  const double small = grid_point(top - depth - 1, base) * 1.01;
  const Instance inst = weighted({big, small});
  const auto plan = plan_pruning(inst, fixtures::hyps({{1, 2}}), cfg);
  EXPECT_EQ(plan.top[0], top);
  EXPECT_EQ(plan.intervals.count(top - depth - 1), 0u);
  EXPECT_DOUBLE_EQ(plan.discarded_weight[0], small);
  const auto sk = SumSketch::compress(inst, fixtures::hyps({{1, 2}}), cfg);
  EXPECT_EQ(sk.intervals().count(top - depth - 1), 0u);

  // One bucket shallower survives.
  const Instance kept = weighted({big, grid_point(top - depth, base) * 1.01});
  EXPECT_EQ(plan_pruning(kept, fixtures::hyps({{1, 2}}), cfg).discarded_weight[0], 0.0);
}

TEST(SumSketchTest, PruningLossAndIntervalInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto w = fixtures::random_workload(2000, 5, seed, 0.3, 1e-3, 1e6);
    const Instance inst(w.tuples);
    const SumConfig cfg{0.3, 0.1, seed};
    const auto plan = plan_pruning(inst, w.hyps, cfg);
    const auto depth = cfg.prune_depth(inst.size());
    for (std::size_t i = 0; i < 5; ++i) {
      ASSERT_TRUE(plan.top[i].has_value());
      EXPECT_LE(plan.discarded_weight[i], cfg.eps_prime() * grid_point(*plan.top[i], cfg.grid_base()));
      std::size_t intervals = 0;
      for (const auto& [l, members] : plan.intervals) {
        if (members[i].empty()) continue;
        ++intervals;
        for (std::size_t p : members[i]) {
          EXPECT_LE(grid_point(l, cfg.grid_base()), inst[p].weight);
          EXPECT_LT(inst[p].weight, grid_point(l + 1, cfg.grid_base()));
        }
      }
      EXPECT_LE(intervals, depth + 1);
    }
  }
}

TEST(SumSketchTest, RejectsNonPositiveWeights) {
  const Instance inst = weighted({2.0, -3.0});
  try {
    SumSketch::compress(inst, fixtures::hyps({{1, 2}}), SumConfig{0.2, 0.1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveWeight);
  }
  EXPECT_THROW(SumSketch::compress(weighted({0.0}), fixtures::hyps({{1}}), SumConfig{0.2, 0.1, 0}), Error);
}

TEST(SumSketchTest, ConstantWeightAverage) {
  const Instance inst = weighted(std::vector<double>(200, 37.0));
  const auto w = fixtures::random_workload(200, 3, 9);
  const SumConfig cfg{0.2, 0.1, 1};
  const auto sk = SumSketch::compress(inst, w.hyps, cfg);
  for (const Scenario& s : all_scenarios(3)) {
    const double avg = sk.estimate_average(s);
    EXPECT_LE(avg, 37.0 * (1 + cfg.epsilon) * (1 + cfg.epsilon));
    EXPECT_GE(avg, 37.0 * (1 - cfg.epsilon) * (1 - cfg.epsilon));
  }
}

TEST(SumSketchTest, RandomSumsAndAverages) {
  const auto w = fixtures::random_workload(3000, 4, 21);
  const Instance inst(w.tuples);
  const SumConfig cfg{0.2, 0.1, 21};
  const auto sk = SumSketch::compress(inst, w.hyps, cfg);
  for (const Scenario& s : all_scenarios(4)) {
    const double sum = oracle::sum(inst, w.hyps, s);
    EXPECT_LE(std::abs(sk.estimate_sum(s) - sum), cfg.epsilon * sum);
    const double avg = oracle::average(inst, w.hyps, s);
    EXPECT_LE(std::abs(sk.estimate_average(s) - avg) / avg, (1 + cfg.epsilon) / (1 - cfg.epsilon) - 1);
  }
}

TEST(SumOracle, MonotoneInScenario) {
  const auto w = fixtures::random_workload(300, 4, 8);
  const Instance inst(w.tuples);
  for (const Scenario& a : all_scenarios(4))
    for (const Scenario& b : all_scenarios(4))
      if (std::includes(b.on().begin(), b.on().end(), a.on().begin(), a.on().end())) {
        EXPECT_LE(oracle::sum(inst, w.hyps, a), oracle::sum(inst, w.hyps, b));
        EXPECT_LE(oracle::count(inst, w.hyps, a), oracle::count(inst, w.hyps, b));
      }
}
