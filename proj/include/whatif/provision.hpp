#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "whatif/dataset.hpp"
#include "whatif/sketch_io.hpp"

namespace whatif {

struct ProvisionRequest {
  QueryKind kind = QueryKind::Count;
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  std::string query_text;                                   // complex only
  nlohmann::json descriptor = nlohmann::json::object();     // complex only
  std::optional<double> reg_constant;
  std::optional<std::size_t> sample_override;
};

// Validates the data (duplicate ids, dangling members, weights where they matter) and
// throws InvalidArgument / NonPositiveWeight before compressing.
SketchContainer provision(const std::vector<Tuple>& tuples, const HypothesesFile& hyps, const ProvisionRequest& req);
SketchContainer provision(const std::vector<RegRow>& rows, const HypothesesFile& hyps, const ProvisionRequest& req);

// The exact answer in the same shape the sketch answer takes.
ScenarioAnswer oracle_answer(const std::vector<Tuple>& tuples, const HypothesesFile& hyps,
                             const ProvisionRequest& req, const Scenario& s, const AnswerParams& params);
ScenarioAnswer oracle_answer(const std::vector<RegRow>& rows, const HypothesesFile& hyps,
                             const ProvisionRequest& req, const Scenario& s);

bool is_regression(QueryKind kind);

}  // namespace whatif
