#include "whatif/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "whatif/leverage.hpp"

namespace whatif::oracle {

std::uint64_t count(const Instance& inst, const HypotheticalSet& h, const Scenario& s) {
  return apply_scenario(inst, h, s).size();
}

double sum(const Instance& inst, const HypotheticalSet& h, const Scenario& s) {
  const Instance sub = apply_scenario(inst, h, s);
  double total = 0.0;
  for (const Tuple& t : sub.tuples()) total += t.weight;
  return total;
}

double average(const Instance& inst, const HypotheticalSet& h, const Scenario& s) {
  const Instance sub = apply_scenario(inst, h, s);
  if (sub.empty()) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");
  double total = 0.0;
  for (const Tuple& t : sub.tuples()) total += t.weight;
  return total / static_cast<double>(sub.size());
}

std::vector<Tuple> sorted_result(const Instance& inst, const HypotheticalSet& h, const Scenario& s) {
  const Instance sub = apply_scenario(inst, h, s);
  std::vector<Tuple> out(sub.tuples().begin(), sub.tuples().end());
  std::sort(out.begin(), out.end(), [](const Tuple& a, const Tuple& b) {
    return a.weight < b.weight || (a.weight == b.weight && a.id < b.id);
  });
  return out;
}

RankedTuple quantile(const Instance& inst, const HypotheticalSet& h, const Scenario& s, double phi) {
  if (!(phi > 0.0 && phi <= 1.0)) throw Error(ErrorCode::InvalidArgument, "phi must lie in (0, 1]");
  const auto sorted = sorted_result(inst, h, s);
  if (sorted.empty()) throw Error(ErrorCode::EmptyScenarioResult, "scenario " + s.to_string() + " is empty");
  const std::size_t rank = std::min(ceil_rank(phi * static_cast<double>(sorted.size())), sorted.size());
  return RankedTuple{sorted[rank - 1], rank};
}

std::size_t rank_of(const Instance& inst, const HypotheticalSet& h, const Scenario& s, double x) {
  const Instance sub = apply_scenario(inst, h, s);
  std::size_t r = 0;
  for (const Tuple& t : sub.tuples())
    if (t.weight <= x) ++r;
  return r;
}

std::size_t rank_of_tuple(const Instance& inst, const HypotheticalSet& h, const Scenario& s, TupleId id) {
  const auto sorted = sorted_result(inst, h, s);
  for (std::size_t r = 0; r < sorted.size(); ++r)
    if (sorted[r].id == id) return r + 1;
  return 0;
}

RegressionOptimum regression(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s) {
  const RegInstance sub = apply_scenario(inst, h, s);
  std::vector<std::size_t> all(sub.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  sub.stack(all, a, b);
  RegressionOptimum opt;
  opt.coefficients = a.rows() == 0 ? Eigen::VectorXd::Zero(inst.dim()) : Eigen::VectorXd(min_norm_solve(a, b));
  opt.residual = a.rows() == 0 ? 0.0 : residual_norm(a, opt.coefficients, b);
  return opt;
}

double residual(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s, const Eigen::VectorXd& x) {
  const RegInstance sub = apply_scenario(inst, h, s);
  double sq = 0.0;
  for (const RegRow& r : sub.rows()) {
    const double e = r.features.dot(x) - r.target;
    sq += e * e;
  }
  return std::sqrt(sq);
}

std::vector<GroupRow> complex(const Instance& inst, const HypotheticalSet& h, const ComplexQuery& q,
                              const Scenario& s, const AnswerParams& params) {
  if (q.numeric.kind == QueryKind::Quantile && !params.phi && !params.rank_of)
    throw Error(ErrorCode::InvalidArgument, "quantile answers need phi or rank-of");
  const Instance sub = apply_scenario(inst, h, s);
  const auto rows = eval_ucq(sub, q.logical, schema_of(inst));
  const auto cols = q.value_columns();

  std::map<Row, std::vector<Row>> groups;
  for (const Row& r : rows) {
    Row key;
    for (std::size_t c : q.group_by) key.push_back(r[c]);
    groups[key].push_back(r);
  }

  std::vector<GroupRow> out;
  for (const auto& [key, members] : groups) {
    GroupRow row;
    row.key = key;
    try {
      // Rebuild the group as a one-hypothetical instance and reuse the exact routines above.
      const std::vector<std::size_t> one{0};
      const Scenario all_on(one);
      std::vector<TupleId> ids;
      for (std::size_t i = 0; i < members.size(); ++i) ids.push_back(i);
      const HypotheticalSet single({ids});
      if (q.numeric.kind == QueryKind::Regression) {
        std::vector<RegRow> reg;
        for (std::size_t i = 0; i < members.size(); ++i) {
          RegRow rr;
          rr.id = i;
          rr.features.resize(static_cast<Eigen::Index>(cols.size() - 1));
          for (std::size_t c = 0; c + 1 < cols.size(); ++c)
            rr.features(static_cast<Eigen::Index>(c)) = parse_number(members[i][cols[c]]);
          rr.target = parse_number(members[i][cols.back()]);
          reg.push_back(std::move(rr));
        }
        row.value = regression(RegInstance(std::move(reg)), single, all_on).coefficients;
      } else {
        std::vector<Tuple> tuples;
        for (std::size_t i = 0; i < members.size(); ++i) {
          Tuple t;
          t.id = i;
          t.weight = q.numeric.kind == QueryKind::Count ? 1.0 : parse_number(members[i][cols.front()]);
          tuples.push_back(std::move(t));
        }
        const Instance g(std::move(tuples));
        switch (q.numeric.kind) {
          case QueryKind::Count: row.value = count(g, single, all_on); break;
          case QueryKind::Sum: row.value = sum(g, single, all_on); break;
          case QueryKind::Average: row.value = average(g, single, all_on); break;
          default: {
            if (params.phi) {
              const RankedTuple rt = quantile(g, single, all_on, *params.phi);
              row.value = QuantileAnswer{QtlRecord{rt.tuple.id, rt.tuple.weight, HypMask(1)},
                                         static_cast<double>(rt.rank), false};
            } else {
              const std::size_t r = rank_of(g, single, all_on, *params.rank_of);
              row.value = RankAnswer{static_cast<double>(r), QtlRecord{}, false};
            }
          }
        }
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace whatif::oracle
