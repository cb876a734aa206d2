#include "whatif/core.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace whatif {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyScenario: return "EmptyScenario";
    case ErrorCode::UnknownHypothetical: return "UnknownHypothetical";
    case ErrorCode::InvalidCount: return "InvalidCount";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::EmptyScenarioResult: return "EmptyScenarioResult";
    case ErrorCode::EmptyHypothetical: return "EmptyHypothetical";
    case ErrorCode::DegenerateHypothetical: return "DegenerateHypothetical";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NotDisjoint: return "NotDisjoint";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::NonBooleanQuery: return "NonBooleanQuery";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NegationUnsupported: return "NegationUnsupported";
    case ErrorCode::RecursionUnsupported: return "RecursionUnsupported";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MalformedSection: return "MalformedSection";
  }
  return "Unknown";
}

Instance::Instance(std::vector<Tuple> tuples, double weight_bound)
    : detail::RowStore<Tuple>(std::move(tuples)) {
  double w = 1.0;
  for (const Tuple& t : this->tuples()) w = std::max(w, std::abs(t.weight));
  weight_bound_ = weight_bound > 0.0 ? std::max(weight_bound, w) : w;
}

RegInstance::RegInstance(std::vector<RegRow> rows) : detail::RowStore<RegRow>(std::move(rows)) {
  if (empty()) return;
  dim_ = (*this)[0].features.size();
  for (const RegRow& r : this->rows())
    if (r.features.size() != dim_)
      throw Error(ErrorCode::InvalidArgument, "regression rows must share one feature dimension");
  if (dim_ < 1) throw Error(ErrorCode::InvalidArgument, "feature dimension must be >= 1");
}

void RegInstance::stack(std::span<const std::size_t> positions, Eigen::MatrixXd& a,
                        Eigen::VectorXd& b) const {
  a.resize(static_cast<Eigen::Index>(positions.size()), dim_);
  b.resize(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const RegRow& row = (*this)[positions[r]];
    a.row(static_cast<Eigen::Index>(r)) = row.features.transpose();
    b(static_cast<Eigen::Index>(r)) = row.target;
  }
}

HypotheticalSet::HypotheticalSet(std::vector<std::vector<TupleId>> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw Error(ErrorCode::InvalidArgument, "at least one hypothetical is required");
  for (auto& m : members_) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
  }
}

Scenario::Scenario(std::vector<std::size_t> on) : on_(std::move(on)) {
  std::sort(on_.begin(), on_.end());
  on_.erase(std::unique(on_.begin(), on_.end()), on_.end());
}

Scenario Scenario::from_one_based(std::span<const long long> indices) {
  std::vector<std::size_t> on;
  on.reserve(indices.size());
  for (long long i : indices) {
    if (i < 1) throw Error(ErrorCode::UnknownHypothetical, "hypothetical index " + std::to_string(i));
    on.push_back(static_cast<std::size_t>(i - 1));
  }
  return Scenario(std::move(on));
}

Scenario Scenario::parse(std::string_view text) {
  std::vector<long long> idx;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty()) {
      long long v = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc{} || p != part.data() + part.size())
        throw Error(ErrorCode::InvalidArgument, "bad scenario index '" + std::string(part) + "'");
      idx.push_back(v);
    }
    pos = comma + 1;
  }
  return from_one_based(idx);
}

void Scenario::check(std::size_t k) const {
  if (on_.empty()) throw Error(ErrorCode::EmptyScenario, "scenario turns on no hypothetical");
  if (on_.back() >= k)
    throw Error(ErrorCode::UnknownHypothetical,
                "hypothetical " + std::to_string(on_.back() + 1) + " exceeds k=" + std::to_string(k));
}

bool Scenario::contains(std::size_t i) const {
  return std::binary_search(on_.begin(), on_.end(), i);
}

std::vector<long long> Scenario::one_based() const {
  std::vector<long long> out;
  for (std::size_t i : on_) out.push_back(static_cast<long long>(i) + 1);
  return out;
}

std::string Scenario::to_string() const {
  std::string s;
  for (std::size_t i : on_) {
    if (!s.empty()) s += ',';
    s += std::to_string(i + 1);
  }
  return s;
}

std::vector<Scenario> all_scenarios(std::size_t k) {
  if (k >= 31) throw Error(ErrorCode::InvalidArgument, "scenario enumeration limited to k < 31");
  std::vector<Scenario> out;
  out.reserve((std::size_t{1} << k) - 1);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < k; ++i)
      if ((mask >> i) & 1u) on.push_back(i);
    out.emplace_back(std::move(on));
  }
  return out;
}

HypMask::HypMask(std::size_t k, const Scenario& s) : HypMask(k) {
  for (std::size_t i : s.on())
    if (i < k) set(i);
}

bool HypMask::any() const {
  return std::any_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t HypMask::first_common(const HypMask& other) const {
  const std::size_t n = std::min(words_.size(), other.words_.size());
  for (std::size_t w = 0; w < n; ++w) {
    std::uint64_t both = words_[w] & other.words_[w];
    if (both) return std::min(k_, w * 64 + static_cast<std::size_t>(std::countr_zero(both)));
  }
  return k_;
}

std::vector<HypMask> memberships(std::size_t n, const std::vector<std::vector<std::size_t>>& members) {
  std::vector<HypMask> out(n, HypMask(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t p : members[i]) out[p].set(i);
  return out;
}

std::vector<TupleId> scenario_ids(const HypotheticalSet& h, const Scenario& s) {
  s.check(h.k());
  std::vector<TupleId> ids;
  for (std::size_t i : s.on()) {
    auto m = h.members(i);
    ids.insert(ids.end(), m.begin(), m.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

namespace {

template <typename Row>
std::vector<Row> select_rows(const detail::RowStore<Row>& store, const std::vector<TupleId>& ids) {
  std::vector<Row> out;
  out.reserve(ids.size());
  for (TupleId id : ids)
    if (auto p = store.position(id)) out.push_back(store[*p]);
  return out;
}

template <typename Row>
void scan_ids(std::span<const Row> rows, const HypotheticalSet& h, Diagnostics& d) {
  std::unordered_set<TupleId> seen;
  std::set<TupleId> dups;
  for (const Row& r : rows)
    if (!seen.insert(r.id).second) dups.insert(r.id);
  d.duplicate_ids.assign(dups.begin(), dups.end());

  std::unordered_map<TupleId, std::size_t> owner;
  for (std::size_t i = 0; i < h.k(); ++i) {
    if (h.members(i).empty()) d.empty_hypotheticals.push_back(i);
    for (TupleId id : h.members(i)) {
      if (!seen.count(id)) d.dangling.emplace_back(i, id);
      auto [it, fresh] = owner.emplace(id, i);
      if (!fresh && it->second != i) d.disjoint = false;
    }
  }
}

}  // namespace

Instance apply_scenario(const Instance& inst, const HypotheticalSet& h, const Scenario& s) {
  return Instance(select_rows(inst, scenario_ids(h, s)), inst.weight_bound());
}

RegInstance apply_scenario(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s) {
  return RegInstance(select_rows(inst, scenario_ids(h, s)));
}

Diagnostics validate(std::span<const Tuple> tuples, const HypotheticalSet& h) {
  Diagnostics d;
  scan_ids(tuples, h, d);
  for (const Tuple& t : tuples)
    if (!(t.weight > 0.0) || !std::isfinite(t.weight)) d.non_positive_weights.push_back(t.id);
  return d;
}

Diagnostics validate(std::span<const RegRow> rows, const HypotheticalSet& h) {
  Diagnostics d;
  scan_ids(rows, h, d);
  return d;
}

std::string Diagnostics::summary() const {
  std::ostringstream os;
  for (TupleId id : duplicate_ids) os << "DuplicateId(" << id << ")\n";
  for (auto [i, id] : dangling) os << "DanglingReference(h" << i + 1 << ", " << id << ")\n";
  for (TupleId id : non_positive_weights) os << "NonPositiveWeight(" << id << ")\n";
  for (std::size_t i : empty_hypotheticals) os << "EmptyHypothetical(h" << i + 1 << ")\n";
  os << "Disjoint=" << (disjoint ? "true" : "false") << "\n";
  return os.str();
}

std::mt19937_64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (std::uint64_t t : tags) {
    words.push_back(static_cast<std::uint32_t>(t));
    words.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace whatif
