#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "whatif/cnt_sketch.hpp"
#include "whatif/qtl_sketch.hpp"
#include "whatif/reg_sketch.hpp"
#include "whatif/sum_sketch.hpp"

namespace whatif {

enum class QueryKind { Count, Sum, Average, Quantile, Regression, RegressionDisjoint, Complex };

std::string_view to_string(QueryKind kind);
QueryKind parse_kind(std::string_view name);  // accepts "avg" and "average"

// Extraction-time parameters; phi and rank_of only matter for quantile sketches.
struct AnswerParams {
  std::optional<double> phi;
  std::optional<double> rank_of;
};

using NumericSketch = std::variant<CntSketch, SumSketch, QtlSketch, RegSketch, DisjointRegSketch>;
using NumericValue = std::variant<std::uint64_t, double, QuantileAnswer, RankAnswer, Eigen::VectorXd>;

std::size_t sketch_k(const NumericSketch& sketch);

// Throws Error (InvalidArgument for a missing phi, extraction codes otherwise).
NumericValue answer_numeric(const NumericSketch& sketch, QueryKind kind, const Scenario& s,
                            const AnswerParams& params);

// Same, for a sketch held outside a NumericSketch (instantiated for each member type).
template <typename Sketch>
NumericValue answer_sketch(const Sketch& sketch, QueryKind kind, const Scenario& s, const AnswerParams& params);

bool degraded(const NumericValue& v);
nlohmann::json to_json(const NumericValue& v);

}  // namespace whatif
