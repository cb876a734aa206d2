#include <gtest/gtest.h>

#include "support.hpp"
#include "whatif/leverage.hpp"
#include "whatif/oracle.hpp"
#include "whatif/reg_sketch.hpp"

using namespace whatif;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(gen);
  return m;
}

// L_i = min ||x||^2 subject to M^T x = M_(i), solved as a minimum-norm system.
double min_norm_score(const Eigen::MatrixXd& m, Eigen::Index i) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m.transpose());
  const Eigen::VectorXd x = cod.solve(m.row(i).transpose());
  return x.squaredNorm();
}

RegInstance instance_of(const fixtures::RegWorkload& w) { return RegInstance(w.rows); }

}  // namespace

TEST(Leverage, IdentityHasUnitScores) {
  const auto lev = leverage_scores(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(lev.rank, 4);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(lev.scores(i), 1.0, 1e-12);
}

TEST(Leverage, DuplicatedRowsShareScores) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 3, -1, 1, 2;
  const auto lev = leverage_scores(m);
  EXPECT_EQ(lev.rank, 2);
  EXPECT_NEAR(lev.scores(0), lev.scores(2), 1e-12);
  EXPECT_NEAR(lev.scores.sum(), 2.0, 1e-12);
}

TEST(Leverage, MatchesMinNormCharacterization) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd m = random_matrix(50, 3, gen);
    const auto lev = leverage_scores(m);
    EXPECT_EQ(lev.rank, 3);
    EXPECT_NEAR(lev.scores.sum(), 3.0, 1e-9);
    for (Eigen::Index i = 0; i < m.rows(); ++i) EXPECT_NEAR(lev.scores(i), min_norm_score(m, i), 1e-9);
  }
}

TEST(Leverage, RankDeficientAndZero) {
  Eigen::MatrixXd m(4, 3);
  m << 1, 2, 3, 2, 4, 6, 0, 1, 1, 0, 2, 2;  // rank 2
  const auto lev = leverage_scores(m);
  EXPECT_EQ(lev.rank, 2);
  EXPECT_NEAR(lev.scores.sum(), 2.0, 1e-9);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(lev.scores(i), min_norm_score(m, i), 1e-9);
  const auto zero = leverage_scores(Eigen::MatrixXd::Zero(3, 2));
  EXPECT_EQ(zero.rank, 0);
  EXPECT_EQ(zero.scores.sum(), 0.0);
}

TEST(Leverage, MonotoneUnderStacking) {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index d = size(gen) % 5 + 1;
    const Eigen::MatrixXd a = random_matrix(size(gen), d, gen);
    const Eigen::MatrixXd b = random_matrix(size(gen), d, gen);
    Eigen::MatrixXd stacked(a.rows() + b.rows(), d);
    stacked << a, b;
    const auto alone = leverage_scores(a);
    const auto both = leverage_scores(stacked);
    for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_LE(both.scores(i), alone.scores(i) + 1e-9);
  }
}

TEST(Leverage, FloatScalarInstantiates) {
  const Eigen::MatrixXf m = Eigen::MatrixXf::Identity(3, 3);
  EXPECT_NEAR(leverage_scores(m).scores.sum(), 3.0f, 1e-5f);
}

TEST(RegConfigTest, SampleCount) {
  const RegConfig cfg{0.5, 0.1, 0};
  // 16 / 0.5 * 6 * 5 * log2(5) * (6 + log2(10))
  const double expect = 32.0 * 30.0 * std::log2(5.0) * (6.0 + std::log2(10.0));
  EXPECT_EQ(cfg.sample_count(6, 5), static_cast<std::size_t>(std::ceil(expect)));
  RegConfig tiny{0.5, 0.1, 0, 16.0, 1};
  EXPECT_EQ(tiny.sample_count(2, 3), 1u);
}

TEST(QuantizeRate, RoundsUpAndNeverZero) {
  EXPECT_EQ(quantize_rate(0.5, 10), 5u);
  EXPECT_EQ(quantize_rate(0.51, 10), 6u);
  EXPECT_EQ(quantize_rate(1e-9, 10), 1u);
  EXPECT_EQ(quantize_rate(0.0, 10), 0u);
}

TEST(RegSketchTest, RatesAreConsistentWithProfiles) {
  const auto w = fixtures::random_reg_workload(300, 3, 4, 5);
  const RegInstance inst = instance_of(w);
  const auto sk = RegSketch::compress(inst, w.hyps, RegConfig{0.5, 0.1, 5, 16.0, 200});
  const auto members = w.hyps.positions(inst);
  const auto profiles = leverage_profiles(inst, members);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(profiles[i].probabilities.sum(), 1.0, 1e-9);
    ASSERT_EQ(sk.samples()[i].size(), 200u);
    for (const RegSample& smp : sk.samples()[i]) {
      EXPECT_GT(smp.rates[i], 0u);
      const std::size_t pos = *inst.position(smp.id);
      for (std::size_t i2 = 0; i2 < 4; ++i2) {
        const auto& m = members[i2];
        const auto it = std::find(m.begin(), m.end(), pos);
        if (it == m.end()) {
          EXPECT_EQ(smp.rates[i2], 0u);
          continue;
        }
        const double p = profiles[i2].probabilities(it - m.begin());
        EXPECT_NEAR(static_cast<double>(smp.rates[i2]) / 300.0, p, 1.0 / 300.0 + 1e-12);
      }
    }
  }
}

TEST(RegSketchTest, SingleHypotheticalRates) {
  const auto w = fixtures::random_reg_workload(100, 2, 1, 9);
  const auto sk = RegSketch::compress(instance_of(w), w.hyps, RegConfig{0.5, 0.1, 9, 16.0, 50});
  for (const RegSample& smp : sk.samples()[0]) {
    ASSERT_EQ(smp.rates.size(), 1u);
    EXPECT_GT(smp.rates[0], 0u);
  }
}

TEST(RegSketchTest, ConsistentSystemsAreSolvedExactly) {
  const auto w = fixtures::random_reg_workload(400, 4, 3, 2, 0.0);
  const RegInstance inst = instance_of(w);
  const auto sk = RegSketch::compress(inst, w.hyps, RegConfig{0.5, 0.1, 2});
  for (const Scenario& s : all_scenarios(3)) {
    const Eigen::VectorXd x = sk.solve(s);
    EXPECT_LE(oracle::residual(inst, w.hyps, s, x), 1e-8);
  }
}

TEST(RegSketchTest, OnesDesignApproachesMean) {
  std::vector<RegRow> rows;
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> value(0.0, 10.0);
  std::vector<TupleId> a, b;
  for (TupleId id = 1; id <= 500; ++id) {
    rows.push_back(RegRow{id, Eigen::VectorXd::Ones(1), value(gen)});
    (id % 3 ? a : b).push_back(id);
  }
  const RegInstance inst(rows);
  const auto h = fixtures::hyps({a, b});
  const auto sk = RegSketch::compress(inst, h, RegConfig{0.5, 0.1, 4});
  for (const Scenario& s : all_scenarios(2)) {
    const auto opt = oracle::regression(inst, h, s);
    double mean = 0.0;
    const RegInstance sub = apply_scenario(inst, h, s);
    for (const RegRow& r : sub.rows()) mean += r.target;
    mean /= static_cast<double>(sub.size());
    EXPECT_NEAR(opt.coefficients(0), mean, 1e-9);
    EXPECT_LE(oracle::residual(inst, h, s, sk.solve(s)), 1.5 * opt.residual);
  }
}

TEST(RegSketchTest, ResidualWithinFactor) {
  const auto w = fixtures::random_reg_workload(1000, 3, 3, 8);
  const RegInstance inst = instance_of(w);
  const auto sk = RegSketch::compress(inst, w.hyps, RegConfig{0.5, 0.1, 8});
  for (const Scenario& s : all_scenarios(3)) {
    const double opt = oracle::regression(inst, w.hyps, s).residual;
    EXPECT_LE(oracle::residual(inst, w.hyps, s, sk.solve(s)), 1.5 * opt);
  }
}

TEST(RegSketchTest, UnionRateDominatesScaledLeverage) {
  // q_j >= L_{S,j} / (k * rho_S) for every stored row of every on-hypothetical.
  const auto w = fixtures::random_reg_workload(120, 3, 3, 10);
  const RegInstance inst = instance_of(w);
  const auto sk = RegSketch::compress(inst, w.hyps, RegConfig{0.5, 0.1, 10, 16.0, 60});
  for (const Scenario& s : all_scenarios(3)) {
    const RegInstance sub = apply_scenario(inst, w.hyps, s);
    std::vector<std::size_t> all(sub.size());
    std::iota(all.begin(), all.end(), 0);
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    sub.stack(all, a, b);
    const auto lev = leverage_scores(a);
    for (std::size_t i : s.on())
      for (const RegSample& smp : sk.samples()[i]) {
        double q = 0.0;
        for (std::size_t i2 : s.on()) q += smp.rates[i2];
        q /= 120.0 * static_cast<double>(s.size());
        const double l = lev.scores(static_cast<Eigen::Index>(*sub.position(smp.id)));
        EXPECT_GE(q + 1e-12, l / (3.0 * static_cast<double>(lev.rank)));
      }
  }
}

TEST(RegSketchTest, Deterministic) {
  const auto w = fixtures::random_reg_workload(200, 2, 3, 1);
  const RegConfig cfg{0.5, 0.1, 77, 16.0, 100};
  EXPECT_EQ(RegSketch::compress(instance_of(w), w.hyps, cfg), RegSketch::compress(instance_of(w), w.hyps, cfg));
}

TEST(RegSketchTest, ZeroRankHypotheticalIsRejected) {
  std::vector<RegRow> rows{{1, Eigen::VectorXd::Zero(2), 1.0}, {2, Eigen::VectorXd::Ones(2), 1.0}};
  try {
    RegSketch::compress(RegInstance(rows), fixtures::hyps({{1}, {2}}), RegConfig{0.5, 0.1, 0, 16.0, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateHypothetical);
  }
}

TEST(RegSketchTest, EmptyHypotheticalAloneIsRejected) {
  const auto w = fixtures::random_reg_workload(50, 2, 1, 3);
  const auto h = fixtures::hyps({std::vector<TupleId>(w.hyps.members(0).begin(), w.hyps.members(0).end()), {}});
  const auto sk = RegSketch::compress(instance_of(w), h, RegConfig{0.5, 0.1, 3, 16.0, 20});
  try {
    sk.solve(Scenario::parse("2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyHypothetical);
  }
  EXPECT_NO_THROW(sk.solve(Scenario::parse("1,2")));
}

TEST(DisjointReg, SingleHypotheticalMatchesDirectSolve) {
  const auto w = fixtures::random_reg_workload(200, 4, 1, 6);
  const RegInstance inst = instance_of(w);
  const auto sk = DisjointRegSketch::compress(inst, w.hyps);
  const Scenario s = Scenario::parse("1");
  const auto opt = oracle::regression(inst, w.hyps, s);
  EXPECT_LE((sk.solve(s) - opt.coefficients).norm(), 1e-9 * (1.0 + opt.coefficients.norm()));
}

TEST(DisjointReg, HalvesMatchFullInstance) {
  const auto w = fixtures::random_reg_workload(300, 3, 1, 7);
  std::vector<TupleId> lo, hi, all;
  for (const RegRow& r : w.rows) {
    (r.id <= 150 ? lo : hi).push_back(r.id);
    all.push_back(r.id);
  }
  const RegInstance inst = instance_of(w);
  const auto sk = DisjointRegSketch::compress(inst, fixtures::hyps({lo, hi}));
  const auto full = oracle::regression(inst, fixtures::hyps({all}), Scenario::parse("1"));
  const double res = oracle::residual(inst, fixtures::hyps({all}), Scenario::parse("1"), sk.solve(Scenario::parse("1,2")));
  EXPECT_NEAR(res, full.residual, 1e-9 * full.residual);
  for (const auto& g : sk.gram()) EXPECT_LE((g - g.transpose()).norm(), 0.0);
}

TEST(DisjointReg, RejectsOverlap) {
  const auto w = fixtures::random_reg_workload(20, 2, 1, 1);
  try {
    DisjointRegSketch::compress(instance_of(w), fixtures::hyps({{1, 2}, {2, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDisjoint);
  }
}

TEST(RegOracle, NormalEquationsAgreeWithFactorization) {
  const auto w = fixtures::random_reg_workload(500, 5, 3, 13);
  const RegInstance inst = instance_of(w);
  for (const Scenario& s : all_scenarios(3)) {
    const RegInstance sub = apply_scenario(inst, w.hyps, s);
    std::vector<std::size_t> all(sub.size());
    std::iota(all.begin(), all.end(), 0);
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    sub.stack(all, a, b);
    const Eigen::VectorXd normal = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    const auto opt = oracle::regression(inst, w.hyps, s);
    EXPECT_NEAR((a * normal - b).norm(), opt.residual, 1e-9 * opt.residual);
    EXPECT_LE(opt.residual, (a * normal - b).norm() * (1 + 1e-12));
  }
}
