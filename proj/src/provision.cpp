#include "whatif/provision.hpp"

#include <cmath>

#include "whatif/oracle.hpp"

namespace whatif {

namespace {

void require(const Diagnostics& d, bool aggregates) {
  if (aggregates && !d.non_positive_weights.empty())
    throw Error(ErrorCode::NonPositiveWeight, "tuple " + std::to_string(d.non_positive_weights.front()) +
                                                  " has a non-positive weight");
  if (!d.ok_for_relations()) throw Error(ErrorCode::InvalidArgument, "invalid input:\n" + d.summary());
}

nlohmann::json common_parameters(const ProvisionRequest& req, const HypothesesFile& hyps, std::size_t n) {
  nlohmann::json p;
  p["epsilon"] = req.epsilon;
  p["delta"] = req.delta;
  p["seed"] = req.seed;
  p["k"] = hyps.set.k();
  p["n"] = n;
  std::vector<std::string> labels = hyps.labels;
  for (std::size_t i = labels.size(); i < hyps.set.k(); ++i) labels.push_back("h" + std::to_string(i + 1));
  p["labels"] = labels;
  return p;
}

NumericSpec spec_of(const ProvisionRequest& req) {
  NumericSpec spec;
  spec.epsilon = req.epsilon;
  spec.delta = req.delta;
  spec.seed = req.seed;
  if (req.reg_constant) spec.reg_constant = *req.reg_constant;
  spec.sample_override = req.sample_override;
  return spec;
}

ComplexQuery complex_of(const ProvisionRequest& req, const Instance& inst) {
  if (req.query_text.empty()) throw Error(ErrorCode::InvalidArgument, "complex queries need a query file");
  ComplexQuery q = make_complex_query(parse_ucq(req.query_text), req.descriptor, spec_of(req));
  check_schema(schema_of(inst), q.logical);
  return q;
}

bool needs_positive_weights(QueryKind kind) {
  return kind == QueryKind::Sum || kind == QueryKind::Average || kind == QueryKind::Quantile;
}

}  // namespace

bool is_regression(QueryKind kind) {
  return kind == QueryKind::Regression || kind == QueryKind::RegressionDisjoint;
}

SketchContainer provision(const std::vector<Tuple>& tuples, const HypothesesFile& hyps, const ProvisionRequest& req) {
  if (is_regression(req.kind))
    throw Error(ErrorCode::InvalidArgument, "regression sketches are provisioned from regression rows");
  require(validate(tuples, hyps.set), needs_positive_weights(req.kind));
  const Instance inst(tuples);
  const std::size_t n = inst.size();

  SketchContainer c;
  c.kind = req.kind;
  c.parameters = common_parameters(req, hyps, n);
  c.parameters["W"] = inst.weight_bound();
  nlohmann::json derived;
  switch (req.kind) {
    case QueryKind::Count: {
      const CntConfig cfg{req.epsilon, req.delta, req.seed, std::nullopt};
      c.sketch = CntSketch::compress(inst, hyps.set, cfg);
      derived["capacity"] = cfg.capacity();
      derived["hashes"] = cfg.hash_count(hyps.set.k());
      derived["hashBits"] = domain_bits(n);
      break;
    }
    case QueryKind::Sum:
    case QueryKind::Average: {
      const SumConfig cfg{req.epsilon, req.delta, req.seed};
      c.sketch = SumSketch::compress(inst, hyps.set, cfg);
      derived["epsPrime"] = cfg.eps_prime();
      derived["pruneDepth"] = cfg.prune_depth(n);
      derived["deltaPrime"] = cfg.delta_prime(hyps.set.k(), n);
      derived["gridBound"] = cfg.grid_bound(inst.weight_bound());
      break;
    }
    case QueryKind::Quantile: {
      const QtlConfig cfg{req.epsilon, req.delta, req.seed, req.sample_override};
      const QtlSketch sk = QtlSketch::compress(inst, hyps.set, cfg);
      derived["epsPrime"] = cfg.eps_prime();
      derived["deltaPrime"] = cfg.delta_prime();
      derived["sampleTarget"] = sk.sample_target();
      derived["keep"] = sk.keep();
      derived["gridTop"] = sk.grid_top();
      c.sketch = sk;
      break;
    }
    case QueryKind::Complex: {
      const ComplexQuery q = complex_of(req, inst);
      GroupedSketch g = GroupedSketch::provision(inst, hyps.set, q);
      c.parameters["query"] = req.query_text;
      c.parameters["groupBy"] = q.group_by;
      c.parameters["numericKind"] = std::string(to_string(q.numeric.kind));
      c.parameters["epsilon"] = q.numeric.epsilon;
      c.parameters["delta"] = q.numeric.delta;
      c.parameters["seed"] = q.numeric.seed;
      c.parameters["warnings"] = g.warnings();
      derived["depth"] = g.depth();
      derived["derivedHypotheticals"] = SubsetIndex(g.k(), g.depth()).size();
      derived["groups"] = g.groups().size();
      derived["groupBudget"] = g.group_budget();
      c.sketch = std::move(g);
      break;
    }
    default:
      break;
  }
  c.parameters["derived"] = derived;
  return c;
}

SketchContainer provision(const std::vector<RegRow>& rows, const HypothesesFile& hyps, const ProvisionRequest& req) {
  if (!is_regression(req.kind)) throw Error(ErrorCode::InvalidArgument, "regression rows need a regression query");
  const Diagnostics d = validate(rows, hyps.set);
  require(d, false);
  const RegInstance inst(rows);

  SketchContainer c;
  c.kind = req.kind;
  c.parameters = common_parameters(req, hyps, inst.size());
  nlohmann::json derived;
  derived["dim"] = inst.dim();
  if (req.kind == QueryKind::RegressionDisjoint) {
    c.sketch = DisjointRegSketch::compress(inst, hyps.set);
  } else {
    RegConfig cfg{req.epsilon, req.delta, req.seed, req.reg_constant.value_or(16.0), req.sample_override};
    c.sketch = RegSketch::compress(inst, hyps.set, cfg);
    derived["samples"] = cfg.sample_count(hyps.set.k(), static_cast<std::size_t>(inst.dim()));
    derived["constant"] = cfg.constant;
  }
  c.parameters["derived"] = derived;
  return c;
}

ScenarioAnswer oracle_answer(const std::vector<Tuple>& tuples, const HypothesesFile& hyps,
                             const ProvisionRequest& req, const Scenario& s, const AnswerParams& params) {
  require(validate(tuples, hyps.set), needs_positive_weights(req.kind));
  s.check(hyps.set.k());
  const Instance inst(tuples);
  ScenarioAnswer a;
  a.kind = req.kind;
  a.scenario = s;
  a.epsilon = 0.0;
  a.delta = 0.0;
  switch (req.kind) {
    case QueryKind::Count: a.value = NumericValue(oracle::count(inst, hyps.set, s)); break;
    case QueryKind::Sum: a.value = NumericValue(oracle::sum(inst, hyps.set, s)); break;
    case QueryKind::Average: a.value = NumericValue(oracle::average(inst, hyps.set, s)); break;
    case QueryKind::Quantile: {
      if (params.phi) {
        const auto rt = oracle::quantile(inst, hyps.set, s, *params.phi);
        a.value = NumericValue(QuantileAnswer{QtlRecord{rt.tuple.id, rt.tuple.weight, HypMask()},
                                              static_cast<double>(rt.rank), false});
      } else if (params.rank_of) {
        a.value = NumericValue(RankAnswer{static_cast<double>(oracle::rank_of(inst, hyps.set, s, *params.rank_of)),
                                          QtlRecord{}, false});
      } else {
        throw Error(ErrorCode::InvalidArgument, "quantile answers need phi or rank-of");
      }
      break;
    }
    case QueryKind::Complex: {
      const ComplexQuery q = complex_of(req, inst);
      a.value = oracle::complex(inst, hyps.set, q, s, params);
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "regression oracles need regression rows");
  }
  return a;
}

ScenarioAnswer oracle_answer(const std::vector<RegRow>& rows, const HypothesesFile& hyps,
                             const ProvisionRequest& req, const Scenario& s) {
  require(validate(rows, hyps.set), false);
  s.check(hyps.set.k());
  const RegInstance inst(rows);
  ScenarioAnswer a;
  a.kind = req.kind;
  a.scenario = s;
  a.value = NumericValue(oracle::regression(inst, hyps.set, s).coefficients);
  return a;
}

}  // namespace whatif
