#include "whatif/answer.hpp"

namespace whatif {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

nlohmann::json record_json(const QtlRecord& r) {
  return {{"id", r.id}, {"weight", r.weight}};
}

[[noreturn]] void wrong_sketch(QueryKind kind) {
  throw Error(ErrorCode::InvalidArgument, "sketch does not answer " + std::string(to_string(kind)) + " queries");
}

}  // namespace

std::string_view to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::Count: return "count";
    case QueryKind::Sum: return "sum";
    case QueryKind::Average: return "avg";
    case QueryKind::Quantile: return "quantile";
    case QueryKind::Regression: return "regression";
    case QueryKind::RegressionDisjoint: return "regression-disjoint";
    case QueryKind::Complex: return "complex";
  }
  return "unknown";
}

QueryKind parse_kind(std::string_view name) {
  if (name == "count") return QueryKind::Count;
  if (name == "sum") return QueryKind::Sum;
  if (name == "avg" || name == "average") return QueryKind::Average;
  if (name == "quantile") return QueryKind::Quantile;
  if (name == "regression") return QueryKind::Regression;
  if (name == "regression-disjoint") return QueryKind::RegressionDisjoint;
  if (name == "complex") return QueryKind::Complex;
  throw Error(ErrorCode::InvalidArgument, "unknown query kind '" + std::string(name) + "'");
}

std::size_t sketch_k(const NumericSketch& sketch) {
  return std::visit([](const auto& s) { return s.k(); }, sketch);
}

namespace {

NumericValue answer_one(const CntSketch& c, QueryKind kind, const Scenario& s, const AnswerParams&) {
  if (kind != QueryKind::Count) wrong_sketch(kind);
  return c.estimate(s);
}

NumericValue answer_one(const SumSketch& c, QueryKind kind, const Scenario& s, const AnswerParams&) {
  if (kind == QueryKind::Sum) return c.estimate_sum(s);
  if (kind == QueryKind::Average) return c.estimate_average(s);
  wrong_sketch(kind);
}

NumericValue answer_one(const QtlSketch& c, QueryKind kind, const Scenario& s, const AnswerParams& params) {
  if (kind != QueryKind::Quantile) wrong_sketch(kind);
  if (params.phi) return c.quantile(s, *params.phi);
  if (params.rank_of) return c.rank_of(s, *params.rank_of);
  throw Error(ErrorCode::InvalidArgument, "quantile answers need phi or rank-of");
}

NumericValue answer_one(const RegSketch& c, QueryKind kind, const Scenario& s, const AnswerParams&) {
  if (kind != QueryKind::Regression) wrong_sketch(kind);
  return c.solve(s);
}

NumericValue answer_one(const DisjointRegSketch& c, QueryKind kind, const Scenario& s, const AnswerParams&) {
  if (kind != QueryKind::RegressionDisjoint) wrong_sketch(kind);
  return c.solve(s);
}

}  // namespace

template <typename Sketch>
NumericValue answer_sketch(const Sketch& sketch, QueryKind kind, const Scenario& s, const AnswerParams& params) {
  return answer_one(sketch, kind, s, params);
}

template NumericValue answer_sketch(const CntSketch&, QueryKind, const Scenario&, const AnswerParams&);
template NumericValue answer_sketch(const SumSketch&, QueryKind, const Scenario&, const AnswerParams&);
template NumericValue answer_sketch(const QtlSketch&, QueryKind, const Scenario&, const AnswerParams&);
template NumericValue answer_sketch(const RegSketch&, QueryKind, const Scenario&, const AnswerParams&);
template NumericValue answer_sketch(const DisjointRegSketch&, QueryKind, const Scenario&, const AnswerParams&);

NumericValue answer_numeric(const NumericSketch& sketch, QueryKind kind, const Scenario& s,
                            const AnswerParams& params) {
  return std::visit([&](const auto& sk) { return answer_one(sk, kind, s, params); }, sketch);
}

bool degraded(const NumericValue& v) {
  if (auto* q = std::get_if<QuantileAnswer>(&v)) return q->degraded;
  if (auto* r = std::get_if<RankAnswer>(&v)) return r->degraded;
  return false;
}

nlohmann::json to_json(const NumericValue& v) {
  return std::visit(overloaded{
                        [](std::uint64_t c) { return nlohmann::json{{"estimate", c}}; },
                        [](double x) { return nlohmann::json{{"estimate", x}}; },
                        [](const QuantileAnswer& q) {
                          return nlohmann::json{{"tuple", record_json(q.tuple)}, {"rank", q.rank}};
                        },
                        [](const RankAnswer& r) {
                          return nlohmann::json{{"rank", r.rank}, {"nearest", record_json(r.nearest)}};
                        },
                        [](const Eigen::VectorXd& x) {
                          return nlohmann::json{{"coefficients", std::vector<double>(x.data(), x.data() + x.size())}};
                        },
                    },
                    v);
}

}  // namespace whatif
