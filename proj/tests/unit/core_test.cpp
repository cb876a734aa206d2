#include <gtest/gtest.h>

#include "support.hpp"
#include "whatif/core.hpp"

using namespace whatif;

namespace {

std::vector<TupleId> ids_of(const Instance& inst) {
  std::vector<TupleId> out;
  for (const Tuple& t : inst.tuples()) out.push_back(t.id);
  return out;
}

Instance plain(std::initializer_list<TupleId> ids) {
  std::vector<Tuple> t;
  for (TupleId id : ids) t.push_back(Tuple{id, 1.0, "R", {}});
  return Instance(t);
}

}  // namespace

TEST(ApplyScenario, UnionOfMembers) {
  const Instance inst = plain({1, 2, 3, 4, 5});
  const auto h = fixtures::hyps({{1, 2, 3}, {3, 4}});
  EXPECT_EQ(ids_of(apply_scenario(inst, h, Scenario::parse("1,2"))), (std::vector<TupleId>{1, 2, 3, 4}));
}

TEST(ApplyScenario, Singleton) {
  const Instance inst = plain({1, 2});
  const auto h = fixtures::hyps({{1}});
  EXPECT_EQ(ids_of(apply_scenario(inst, h, Scenario::parse("1"))), (std::vector<TupleId>{1}));
}

TEST(ApplyScenario, RejectsBadScenarios) {
  const Instance inst = plain({1});
  const auto h = fixtures::hyps({{1}});
  try {
    apply_scenario(inst, h, Scenario{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScenario);
  }
  try {
    apply_scenario(inst, h, Scenario::parse("2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownHypothetical);
  }
  EXPECT_THROW(Scenario::parse("0"), Error);
  EXPECT_THROW(Scenario::parse("1,x"), Error);
}

TEST(ApplyScenario, MatchesMembershipScan) {
  const auto w = fixtures::random_workload(100, 5, 11);
  const Instance inst(w.tuples);
  for (const Scenario& s : all_scenarios(5))
    EXPECT_EQ(ids_of(apply_scenario(inst, w.hyps, s)), fixtures::union_by_scan(w.tuples, w.hyps, s)) << s.to_string();
}

TEST(ApplyScenario, UnionAndMonotonicity) {
  const auto w = fixtures::random_workload(60, 4, 5);
  const Instance inst(w.tuples);
  const auto scenarios = all_scenarios(4);
  for (const Scenario& a : scenarios)
    for (const Scenario& b : scenarios) {
      std::vector<std::size_t> both(a.on().begin(), a.on().end());
      both.insert(both.end(), b.on().begin(), b.on().end());
      const auto ua = ids_of(apply_scenario(inst, w.hyps, a));
      const auto ub = ids_of(apply_scenario(inst, w.hyps, b));
      std::vector<TupleId> expect;
      std::set_union(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(expect));
      EXPECT_EQ(ids_of(apply_scenario(inst, w.hyps, Scenario(both))), expect);
      if (std::includes(b.on().begin(), b.on().end(), a.on().begin(), a.on().end()))
        EXPECT_TRUE(std::includes(ub.begin(), ub.end(), ua.begin(), ua.end()));
    }
}

TEST(Validate, Findings) {
  std::vector<Tuple> tuples{{1, 2.0, "R", {}}, {2, -3.0, "R", {}}, {2, 1.0, "R", {}}};
  const auto d = validate(tuples, fixtures::hyps({{1}, {2, 999}, {}}));
  EXPECT_EQ(d.non_positive_weights, (std::vector<TupleId>{2}));
  EXPECT_EQ(d.duplicate_ids, (std::vector<TupleId>{2}));
  ASSERT_EQ(d.dangling.size(), 1u);
  EXPECT_EQ(d.dangling[0].second, 999u);
  EXPECT_EQ(d.empty_hypotheticals, (std::vector<std::size_t>{2}));
  EXPECT_FALSE(d.ok_for_aggregates());
  EXPECT_NE(d.summary().find("NonPositiveWeight"), std::string::npos);
}

TEST(Validate, Disjointness) {
  std::vector<Tuple> tuples{{1, 1.0, "R", {}}, {2, 1.0, "R", {}}, {3, 1.0, "R", {}}};
  EXPECT_TRUE(validate(tuples, fixtures::hyps({{1}, {2, 3}})).disjoint);
  EXPECT_FALSE(validate(tuples, fixtures::hyps({{1, 2}, {2, 3}})).disjoint);
}

TEST(HypMaskTest, FirstCommon) {
  HypMask a(130), b(130);
  a.set(3);
  a.set(129);
  b.set(129);
  EXPECT_EQ(a.first_common(b), 129u);
  b.set(3);
  EXPECT_EQ(a.first_common(b), 3u);
  EXPECT_EQ(a.first_common(HypMask(130)), 130u);
}

TEST(Substream, DeterministicAndDistinct) {
  auto a = substream(7, {1, 2});
  auto b = substream(7, {1, 2});
  auto c = substream(7, {2, 1});
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
}
