#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "whatif/answer.hpp"
#include "whatif/ucq.hpp"

namespace whatif {

struct NumericSpec {
  QueryKind kind = QueryKind::Count;
  double epsilon = 0.2;
  double delta = 0.1;
  std::uint64_t seed = 0;
  double reg_constant = 16.0;
  std::optional<std::size_t> sample_override;  // quantile t / regression t
};

// <Q_L; G_A; Q_N>: a UCQ, grouping positions in its head, and a numerical query over
// the remaining head positions.
struct ComplexQuery {
  Ucq logical;
  std::vector<std::size_t> group_by;
  NumericSpec numeric;

  std::vector<std::size_t> value_columns() const;
};

// Descriptor: {"group_by": [name-or-position...], "numeric": {"kind": ..., "epsilon": ..., ...}}.
// Missing numeric fields fall back to `defaults`.
ComplexQuery make_complex_query(Ucq logical, const nlohmann::json& descriptor, const NumericSpec& defaults);

struct GroupSketch {
  Row key;
  std::size_t size = 0;
  HypMask nonempty;  // derived hypotheticals with at least one row of this group
  NumericSketch sketch;
};

struct GroupRow {
  Row key;
  std::optional<NumericValue> value;
  std::string error;
};

class GroupedSketch {
 public:
  GroupedSketch() = default;

  static GroupedSketch provision(const Instance& inst, const HypotheticalSet& h, const ComplexQuery& q);

  // Groups whose derived instance is empty under the lifted scenario are omitted;
  // per-group failures are reported in the row.
  std::vector<GroupRow> extract(const Scenario& s, const AnswerParams& params) const;

  std::size_t k() const { return k_; }
  std::size_t depth() const { return depth_; }
  QueryKind numeric_kind() const { return kind_; }
  std::size_t group_budget() const { return budget_; }
  const std::vector<GroupSketch>& groups() const { return groups_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  friend struct SketchCodec;

  std::size_t k_ = 0;
  std::size_t depth_ = 1;
  QueryKind kind_ = QueryKind::Count;
  std::size_t budget_ = 0;
  std::vector<GroupSketch> groups_;
  std::vector<std::string> warnings_;
};

// k^2 (ceil(log2 n) + 1)
std::size_t default_group_budget(std::size_t k, std::size_t n);

// Parses a value cell; throws InvalidArgument for non-numeric text.
double parse_number(const std::string& text);

}  // namespace whatif
