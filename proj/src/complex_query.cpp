#include "whatif/complex_query.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace whatif {

double parse_number(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) throw Error(ErrorCode::InvalidArgument, "not a number: '" + text + "'");
  return v;
}

std::size_t default_group_budget(std::size_t k, std::size_t n) {
  const std::size_t logn = n <= 1 ? 0 : static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n))));
  return k * k * (logn + 1);
}

std::vector<std::size_t> ComplexQuery::value_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < logical.arity(); ++c)
    if (std::find(group_by.begin(), group_by.end(), c) == group_by.end()) out.push_back(c);
  return out;
}

ComplexQuery make_complex_query(Ucq logical, const nlohmann::json& descriptor, const NumericSpec& defaults) {
  ComplexQuery q;
  q.logical = std::move(logical);
  q.numeric = defaults;
  const auto names = q.logical.head_names();
  if (descriptor.contains("group_by")) {
    for (const auto& g : descriptor.at("group_by")) {
      std::size_t pos = names.size();
      if (g.is_number_integer()) {
        pos = g.get<std::size_t>();
      } else if (g.is_string()) {
        auto it = std::find(names.begin(), names.end(), g.get<std::string>());
        pos = static_cast<std::size_t>(it - names.begin());
      }
      if (pos >= names.size())
        throw Error(ErrorCode::InvalidArgument, "group_by entry " + g.dump() + " is not a head attribute");
      q.group_by.push_back(pos);
    }
  }
  std::sort(q.group_by.begin(), q.group_by.end());
  q.group_by.erase(std::unique(q.group_by.begin(), q.group_by.end()), q.group_by.end());

  if (descriptor.contains("numeric")) {
    const auto& n = descriptor.at("numeric");
    if (n.contains("kind")) q.numeric.kind = parse_kind(n.at("kind").get<std::string>());
    if (n.contains("epsilon")) q.numeric.epsilon = n.at("epsilon").get<double>();
    if (n.contains("delta")) q.numeric.delta = n.at("delta").get<double>();
    if (n.contains("seed")) q.numeric.seed = n.at("seed").get<std::uint64_t>();
    if (n.contains("constant")) q.numeric.reg_constant = n.at("constant").get<double>();
    if (n.contains("samples")) q.numeric.sample_override = n.at("samples").get<std::size_t>();
  }

  const std::size_t values = q.value_columns().size();
  switch (q.numeric.kind) {
    case QueryKind::Count:
      break;
    case QueryKind::Sum:
    case QueryKind::Average:
    case QueryKind::Quantile:
      if (values != 1)
        throw Error(ErrorCode::InvalidArgument, "numeric component needs exactly one non-grouped attribute");
      break;
    case QueryKind::Regression:
      if (values < 2)
        throw Error(ErrorCode::InvalidArgument, "regression needs feature attributes and a trailing target");
      break;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "numeric component must be count, sum, avg, quantile or regression");
  }
  return q;
}

namespace {

NumericSketch build_group_sketch(const ComplexQuery& q, const DerivedInstance& derived,
                                 const std::vector<std::size_t>& rows,
                                 const std::vector<std::vector<TupleId>>& members, std::uint64_t seed) {
  const auto cols = q.value_columns();
  const HypotheticalSet hyps(members);
  const NumericSpec& spec = q.numeric;

  if (spec.kind == QueryKind::Regression) {
    std::vector<RegRow> reg;
    for (std::size_t r : rows) {
      const Row& row = derived.rows[r];
      RegRow rr;
      rr.id = r;
      rr.features.resize(static_cast<Eigen::Index>(cols.size() - 1));
      for (std::size_t c = 0; c + 1 < cols.size(); ++c)
        rr.features(static_cast<Eigen::Index>(c)) = parse_number(row[cols[c]]);
      rr.target = parse_number(row[cols.back()]);
      reg.push_back(std::move(rr));
    }
    RegConfig cfg{spec.epsilon, spec.delta, seed, spec.reg_constant, spec.sample_override};
    return RegSketch::compress(RegInstance(std::move(reg)), hyps, cfg);
  }

  std::vector<Tuple> tuples;
  for (std::size_t r : rows) {
    Tuple t;
    t.id = r;
    t.weight = spec.kind == QueryKind::Count ? 1.0 : parse_number(derived.rows[r][cols.front()]);
    tuples.push_back(std::move(t));
  }
  const Instance inst(std::move(tuples));
  switch (spec.kind) {
    case QueryKind::Count:
      return CntSketch::compress(inst, hyps, CntConfig{spec.epsilon, spec.delta, seed, std::nullopt});
    case QueryKind::Sum:
    case QueryKind::Average:
      return SumSketch::compress(inst, hyps, SumConfig{spec.epsilon, spec.delta, seed});
    default:
      return QtlSketch::compress(inst, hyps, QtlConfig{spec.epsilon, spec.delta, seed, spec.sample_override});
  }
}

}  // namespace

GroupedSketch GroupedSketch::provision(const Instance& inst, const HypotheticalSet& h, const ComplexQuery& q) {
  const std::size_t b = std::max<std::size_t>(1, q.logical.max_size());
  const DerivedInstance derived = derive_hypotheticals(inst, h, q.logical, b);

  GroupedSketch gs;
  gs.k_ = h.k();
  gs.depth_ = b;
  gs.kind_ = q.numeric.kind;
  gs.budget_ = default_group_budget(h.k(), inst.size());

  std::map<Row, std::vector<std::size_t>> slices;
  for (std::size_t r = 0; r < derived.rows.size(); ++r) {
    Row key;
    for (std::size_t c : q.group_by) key.push_back(derived.rows[r][c]);
    slices[key].push_back(r);
  }
  if (slices.size() > gs.budget_)
    gs.warnings_.push_back("query has " + std::to_string(slices.size()) + " groups, above the budget of " +
                           std::to_string(gs.budget_));

  const std::size_t dk = derived.subsets.size();
  std::uint64_t g = 0;
  for (const auto& [key, rows] : slices) {
    std::vector<std::uint8_t> in_group(derived.rows.size(), 0);
    for (std::size_t r : rows) in_group[r] = 1;
    std::vector<std::vector<TupleId>> members(dk);
    HypMask nonempty(dk);
    for (std::size_t d = 0; d < dk; ++d) {
      for (TupleId r : derived.hypotheticals.members(d))
        if (in_group[r]) members[d].push_back(r);
      if (!members[d].empty()) nonempty.set(d);
    }
    const std::uint64_t seed = substream(q.numeric.seed, {stream::kGroup, g++})();
    gs.groups_.push_back(
        GroupSketch{key, rows.size(), nonempty, build_group_sketch(q, derived, rows, members, seed)});
  }
  return gs;
}

std::vector<GroupRow> GroupedSketch::extract(const Scenario& s, const AnswerParams& params) const {
  if (kind_ == QueryKind::Quantile && !params.phi && !params.rank_of)
    throw Error(ErrorCode::InvalidArgument, "quantile answers need phi or rank-of");
  const SubsetIndex index(k_, depth_);
  const Scenario lifted = lift_scenario(s, index);
  const HypMask on(index.size(), lifted);
  std::vector<GroupRow> out;
  for (const GroupSketch& g : groups_) {
    if (g.nonempty.first_common(on) == on.size()) continue;
    GroupRow row;
    row.key = g.key;
    try {
      row.value = answer_numeric(g.sketch, kind_, lifted, params);
    } catch (const Error& e) {
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace whatif
