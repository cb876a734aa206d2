#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "whatif/core.hpp"

namespace whatif {

struct Term {
  bool variable = true;
  std::string text;

  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;
};

struct ConjunctiveQuery {
  std::vector<Term> head;
  std::vector<Atom> body;

  std::size_t size() const { return body.size(); }
};

struct Ucq {
  std::vector<ConjunctiveQuery> disjuncts;

  std::size_t arity() const { return disjuncts.empty() ? 0 : disjuncts.front().head.size(); }
  std::size_t max_size() const;
  bool boolean() const { return arity() == 0; }
  // Head variable names of the first disjunct (empty string for constant positions).
  std::vector<std::string> head_names() const;
};

// One rule per line or '|'-separated: `ans(x,z) :- R(x,y), S(y,z)`.
// Identifiers are variables; numbers and quoted strings are constants.
// Negated atoms and rules whose body mentions the head predicate are rejected.
Ucq parse_ucq(std::string_view text);

using Row = std::vector<std::string>;

// relation name -> arity
using Schema = std::map<std::string, std::size_t>;

// Throws SchemaMismatch when a relation has tuples of differing arity.
Schema schema_of(const Instance& inst);
// Throws SchemaMismatch when the query mentions an unknown relation or a wrong arity.
void check_schema(const Schema& schema, const Ucq& q);

// Calls visit(head, support ids) for every homomorphism of every disjunct.
void for_each_derivation(const Instance& inst, const Ucq& q,
                         const std::function<void(const Row&, std::span<const TupleId>)>& visit);

// Set-semantics answer. The schema defaults to the instance's own.
std::set<Row> eval_ucq(const Instance& inst, const Ucq& q);
std::set<Row> eval_ucq(const Instance& inst, const Ucq& q, const Schema& schema);

// Monotone DNF over hypothetical indices (0-based) for a boolean UCQ.
struct ProvenanceDnf {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> terms;

  bool eval(const Scenario& s) const;
  std::size_t max_term_size() const;
};

// Throws NonBooleanQuery.
ProvenanceDnf provenance_sketch(const Instance& inst, const HypotheticalSet& h, const Ucq& q);

// Non-empty subsets of [k] of size <= b, ordered by size then lexicographically.
class SubsetIndex {
 public:
  SubsetIndex() = default;
  SubsetIndex(std::size_t k, std::size_t b);

  std::size_t size() const { return subsets_.size(); }
  std::size_t k() const { return k_; }
  std::size_t depth() const { return b_; }
  const std::vector<std::size_t>& subset(std::size_t idx) const { return subsets_[idx]; }
  std::size_t find(const std::vector<std::size_t>& subset) const;
  static std::string label(const std::vector<std::size_t>& subset);  // 1-based, e.g. "1,3"

 private:
  std::size_t k_ = 0;
  std::size_t b_ = 0;
  std::vector<std::vector<std::size_t>> subsets_;
  std::map<std::vector<std::size_t>, std::size_t> index_;
};

// { S' subset of S : 1 <= |S'| <= b }. Throws EmptyScenario.
std::vector<std::vector<std::size_t>> lift_subsets(const Scenario& s, std::size_t b);
// The same set expressed as a scenario over the derived hypotheticals.
Scenario lift_scenario(const Scenario& s, const SubsetIndex& index);

// I-hat = Q(I) (sorted rows; tuple ids are row positions) and one derived hypothetical
// Q(I|S') per subset S' of size <= b.
struct DerivedInstance {
  std::vector<Row> rows;
  SubsetIndex subsets;
  HypotheticalSet hypotheticals;

  std::optional<std::size_t> row_index(const Row& r) const;
};

DerivedInstance derive_hypotheticals(const Instance& inst, const HypotheticalSet& h, const Ucq& q,
                                     std::size_t b);

}  // namespace whatif
