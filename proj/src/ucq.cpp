#include "whatif/ucq.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_map>

namespace whatif {

namespace {

class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  ConjunctiveQuery parse(std::string& head_name) {
    ConjunctiveQuery cq;
    skip_space();
    head_name = identifier("head predicate");
    skip_space();
    if (peek() == '(') cq.head = term_list();
    skip_space();
    expect(":-");
    do {
      skip_space();
      cq.body.push_back(atom());
      skip_space();
    } while (consume(','));
    skip_space();
    consume('.');
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return cq;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, msg + " at column " + std::to_string(pos_ + 1) + " of '" +
                                           std::string(text_) + "'");
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool consume(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view tok) {
    if (text_.substr(pos_, tok.size()) != tok) fail("expected '" + std::string(tok) + "'");
    pos_ += tok.size();
  }

  std::string identifier(const char* what) {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(text_[start])))
      fail(std::string("expected ") + what);
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    skip_space();
    const char c = peek();
    if (c == '"' || c == '\'') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < text_.size() && text_[pos_] != c) ++pos_;
      if (pos_ == text_.size()) fail("unterminated string constant");
      Term t{false, std::string(text_.substr(start, pos_ - start))};
      ++pos_;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
      const std::size_t start = pos_;
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
        ++pos_;
      return Term{false, std::string(text_.substr(start, pos_ - start))};
    }
    return Term{true, identifier("term")};
  }

  std::vector<Term> term_list() {
    std::vector<Term> terms;
    if (!consume('(')) fail("expected '('");
    skip_space();
    if (consume(')')) return terms;
    do {
      terms.push_back(term());
      skip_space();
    } while (consume(','));
    if (!consume(')')) fail("expected ')'");
    return terms;
  }

  Atom atom() {
    if (peek() == '!' || peek() == '~' || text_.substr(pos_, 2) == "\\+" ||
        text_.substr(pos_, 3) == "\xC2\xAC")
      throw Error(ErrorCode::NegationUnsupported,
                  "negated atoms make provisioning sketches exponential in k");
    Atom a;
    a.relation = identifier("relation name");
    if (a.relation == "not" || a.relation == "NOT")
      throw Error(ErrorCode::NegationUnsupported,
                  "negated atoms make provisioning sketches exponential in k");
    skip_space();
    a.terms = term_list();
    return a;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split_rules(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view part = text.substr(start, end - start);
    const std::size_t hash = part.find_first_of("#%");
    if (hash != std::string_view::npos) part = part.substr(0, hash);
    if (part.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(part);
    start = end + 1;
  };
  for (std::size_t i = 0; i < text.size(); ++i)
    if (text[i] == '\n' || text[i] == '|') flush(i);
  flush(text.size());
  return out;
}

}  // namespace

std::size_t Ucq::max_size() const {
  std::size_t b = 0;
  for (const auto& cq : disjuncts) b = std::max(b, cq.size());
  return b;
}

std::vector<std::string> Ucq::head_names() const {
  std::vector<std::string> out;
  if (disjuncts.empty()) return out;
  for (const Term& t : disjuncts.front().head) out.push_back(t.variable ? t.text : std::string());
  return out;
}

Ucq parse_ucq(std::string_view text) {
  Ucq q;
  std::string predicate;
  for (std::string_view rule : split_rules(text)) {
    std::string head;
    RuleParser parser(rule);
    ConjunctiveQuery cq = parser.parse(head);
    if (predicate.empty()) predicate = head;
    if (head != predicate)
      throw Error(ErrorCode::RecursionUnsupported,
                  "only a single answer predicate is allowed; Datalog programs are not provisionable");
    for (const Atom& a : cq.body)
      if (a.relation == predicate)
        throw Error(ErrorCode::RecursionUnsupported,
                    "recursive rules make provisioning sketches exponential in k");
    for (const Term& t : cq.head) {
      if (!t.variable) continue;
      bool bound = false;
      for (const Atom& a : cq.body)
        for (const Term& u : a.terms) bound = bound || (u.variable && u.text == t.text);
      if (!bound) throw Error(ErrorCode::ParseError, "head variable '" + t.text + "' is not in the body");
    }
    if (!q.disjuncts.empty() && q.disjuncts.front().head.size() != cq.head.size())
      throw Error(ErrorCode::ParseError, "disjuncts must share the head arity");
    q.disjuncts.push_back(std::move(cq));
  }
  if (q.disjuncts.empty()) throw Error(ErrorCode::ParseError, "query has no rules");
  return q;
}

Schema schema_of(const Instance& inst) {
  Schema s;
  for (const Tuple& t : inst.tuples()) {
    auto [it, fresh] = s.emplace(t.relation, t.attrs.size());
    if (!fresh && it->second != t.attrs.size())
      throw Error(ErrorCode::SchemaMismatch, "relation " + t.relation + " has tuples of different arity");
  }
  return s;
}

void check_schema(const Schema& schema, const Ucq& q) {
  for (const auto& cq : q.disjuncts)
    for (const Atom& a : cq.body) {
      auto it = schema.find(a.relation);
      if (it == schema.end()) throw Error(ErrorCode::SchemaMismatch, "unknown relation " + a.relation);
      if (it->second != a.terms.size())
        throw Error(ErrorCode::SchemaMismatch, "relation " + a.relation + " has arity " +
                                                   std::to_string(it->second));
    }
}

void for_each_derivation(const Instance& inst, const Ucq& q,
                         const std::function<void(const Row&, std::span<const TupleId>)>& visit) {
  std::unordered_map<std::string, std::vector<const Tuple*>> by_relation;
  for (const Tuple& t : inst.tuples()) by_relation[t.relation].push_back(&t);
  static const std::vector<const Tuple*> kNone;

  for (const ConjunctiveQuery& cq : q.disjuncts) {
    std::map<std::string, std::size_t> var_ids;
    for (const Atom& a : cq.body)
      for (const Term& t : a.terms)
        if (t.variable) var_ids.emplace(t.text, var_ids.size());

    std::vector<const std::string*> binding(var_ids.size(), nullptr);
    std::vector<TupleId> chosen;
    Row head(cq.head.size());

    std::function<void(std::size_t)> extend = [&](std::size_t depth) {
      if (depth == cq.body.size()) {
        for (std::size_t h = 0; h < cq.head.size(); ++h)
          head[h] = cq.head[h].variable ? *binding[var_ids.at(cq.head[h].text)] : cq.head[h].text;
        std::vector<TupleId> support = chosen;
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        visit(head, support);
        return;
      }
      const Atom& atom = cq.body[depth];
      auto rel = by_relation.find(atom.relation);
      const auto& candidates = rel == by_relation.end() ? kNone : rel->second;
      for (const Tuple* t : candidates) {
        if (t->attrs.size() != atom.terms.size()) continue;
        std::vector<std::size_t> bound_here;
        bool ok = true;
        for (std::size_t c = 0; c < atom.terms.size() && ok; ++c) {
          const Term& term = atom.terms[c];
          if (!term.variable) {
            ok = term.text == t->attrs[c];
            continue;
          }
          const std::size_t v = var_ids.at(term.text);
          if (binding[v] == nullptr) {
            binding[v] = &t->attrs[c];
            bound_here.push_back(v);
          } else {
            ok = *binding[v] == t->attrs[c];
          }
        }
        if (ok) {
          chosen.push_back(t->id);
          extend(depth + 1);
          chosen.pop_back();
        }
        for (std::size_t v : bound_here) binding[v] = nullptr;
      }
    };
    extend(0);
  }
}

std::set<Row> eval_ucq(const Instance& inst, const Ucq& q) { return eval_ucq(inst, q, schema_of(inst)); }

std::set<Row> eval_ucq(const Instance& inst, const Ucq& q, const Schema& schema) {
  check_schema(schema, q);
  std::set<Row> out;
  for_each_derivation(inst, q, [&](const Row& head, std::span<const TupleId>) { out.insert(head); });
  return out;
}

bool ProvenanceDnf::eval(const Scenario& s) const {
  for (const auto& term : terms)
    if (std::all_of(term.begin(), term.end(), [&](std::size_t i) { return s.contains(i); })) return true;
  return false;
}

std::size_t ProvenanceDnf::max_term_size() const {
  std::size_t m = 0;
  for (const auto& t : terms) m = std::max(m, t.size());
  return m;
}

ProvenanceDnf provenance_sketch(const Instance& inst, const HypotheticalSet& h, const Ucq& q) {
  if (!q.boolean()) throw Error(ErrorCode::NonBooleanQuery, "provenance sketches need an empty head");
  check_schema(schema_of(inst), q);

  std::unordered_map<TupleId, std::vector<std::size_t>> owners;
  for (std::size_t i = 0; i < h.k(); ++i)
    for (TupleId id : h.members(i)) owners[id].push_back(i);

  std::set<std::vector<std::size_t>> terms;
  for_each_derivation(inst, q, [&](const Row&, std::span<const TupleId> support) {
    std::vector<const std::vector<std::size_t>*> choices;
    for (TupleId id : support) {
      auto it = owners.find(id);
      if (it == owners.end()) return;  // tuple in no hypothetical: derivation never survives
      choices.push_back(&it->second);
    }
    // Distribute the product of per-tuple disjunctions.
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
      std::vector<std::size_t> term;
      for (std::size_t c = 0; c < choices.size(); ++c) term.push_back((*choices[c])[pick[c]]);
      std::sort(term.begin(), term.end());
      term.erase(std::unique(term.begin(), term.end()), term.end());
      terms.insert(std::move(term));
      std::size_t c = 0;
      while (c < choices.size() && ++pick[c] == choices[c]->size()) pick[c++] = 0;
      if (c == choices.size()) break;
    }
  });

  // Absorption: drop any term that contains another term.
  std::vector<std::vector<std::size_t>> sorted(terms.begin(), terms.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  ProvenanceDnf dnf;
  dnf.k = h.k();
  for (auto& term : sorted) {
    const bool absorbed = std::any_of(dnf.terms.begin(), dnf.terms.end(), [&](const auto& kept) {
      return std::includes(term.begin(), term.end(), kept.begin(), kept.end());
    });
    if (!absorbed) dnf.terms.push_back(std::move(term));
  }
  return dnf;
}

SubsetIndex::SubsetIndex(std::size_t k, std::size_t b) : k_(k), b_(b) {
  std::vector<std::size_t> cur;
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t from, std::size_t size) {
    if (cur.size() == size) {
      index_.emplace(cur, subsets_.size());
      subsets_.push_back(cur);
      return;
    }
    for (std::size_t i = from; i < k; ++i) {
      cur.push_back(i);
      grow(i + 1, size);
      cur.pop_back();
    }
  };
  for (std::size_t size = 1; size <= std::min(b, k); ++size) grow(0, size);
}

std::size_t SubsetIndex::find(const std::vector<std::size_t>& subset) const {
  auto it = index_.find(subset);
  if (it == index_.end()) throw Error(ErrorCode::UnknownHypothetical, "no derived hypothetical " + label(subset));
  return it->second;
}

std::string SubsetIndex::label(const std::vector<std::size_t>& subset) {
  std::string s;
  for (std::size_t i : subset) {
    if (!s.empty()) s += ',';
    s += std::to_string(i + 1);
  }
  return s;
}

std::vector<std::vector<std::size_t>> lift_subsets(const Scenario& s, std::size_t b) {
  if (s.size() == 0) throw Error(ErrorCode::EmptyScenario, "scenario turns on no hypothetical");
  std::vector<std::vector<std::size_t>> out;
  const auto on = s.on();
  std::vector<std::size_t> cur;
  std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t from, std::size_t size) {
    if (cur.size() == size) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = from; i < on.size(); ++i) {
      cur.push_back(on[i]);
      grow(i + 1, size);
      cur.pop_back();
    }
  };
  for (std::size_t size = 1; size <= std::min(b, on.size()); ++size) grow(0, size);
  return out;
}

Scenario lift_scenario(const Scenario& s, const SubsetIndex& index) {
  s.check(index.k());
  std::vector<std::size_t> on;
  for (const auto& sub : lift_subsets(s, index.depth())) on.push_back(index.find(sub));
  return Scenario(std::move(on));
}

std::optional<std::size_t> DerivedInstance::row_index(const Row& r) const {
  auto it = std::lower_bound(rows.begin(), rows.end(), r);
  if (it == rows.end() || *it != r) return std::nullopt;
  return static_cast<std::size_t>(it - rows.begin());
}

DerivedInstance derive_hypotheticals(const Instance& inst, const HypotheticalSet& h, const Ucq& q,
                                     std::size_t b) {
  const Schema schema = schema_of(inst);
  DerivedInstance out;
  const std::set<Row> all = eval_ucq(inst, q, schema);
  out.rows.assign(all.begin(), all.end());
  out.subsets = SubsetIndex(h.k(), b);

  std::vector<std::vector<TupleId>> members(out.subsets.size());
  for (std::size_t idx = 0; idx < out.subsets.size(); ++idx) {
    const Instance sub = apply_scenario(inst, h, Scenario(out.subsets.subset(idx)));
    for (const Row& r : eval_ucq(sub, q, schema)) members[idx].push_back(*out.row_index(r));
  }
  out.hypotheticals = HypotheticalSet(std::move(members));
  return out;
}

}  // namespace whatif
