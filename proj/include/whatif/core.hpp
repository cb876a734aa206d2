#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "whatif/error.hpp"

namespace whatif {

using TupleId = std::uint64_t;

// A base tuple: key, weight, and (for relational queries) a relation name with attributes.
struct Tuple {
  TupleId id = 0;
  double weight = 1.0;
  std::string relation = "R";
  std::vector<std::string> attrs;
};

struct RegRow {
  TupleId id = 0;
  Eigen::VectorXd features;
  double target = 0.0;
};

namespace detail {

// Rows kept sorted by id; positions double as the dense identifiers [n].
template <typename Row>
class RowStore {
 public:
  RowStore() = default;
  explicit RowStore(std::vector<Row> rows) : rows_(std::move(rows)) {
    std::stable_sort(rows_.begin(), rows_.end(),
                     [](const Row& a, const Row& b) { return a.id < b.id; });
    index_.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) index_.emplace(rows_[i].id, i);
  }

  std::span<const Row> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const Row& operator[](std::size_t pos) const { return rows_[pos]; }

  std::optional<std::size_t> position(TupleId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<Row> rows_;
  std::unordered_map<TupleId, std::size_t> index_;
};

}  // namespace detail

class Instance : public detail::RowStore<Tuple> {
 public:
  Instance() = default;
  // weight_bound <= 0 means "derive W from the data".
  explicit Instance(std::vector<Tuple> tuples, double weight_bound = 0.0);

  std::span<const Tuple> tuples() const { return rows(); }
  double weight_bound() const { return weight_bound_; }

 private:
  double weight_bound_ = 1.0;
};

class RegInstance : public detail::RowStore<RegRow> {
 public:
  RegInstance() = default;
  explicit RegInstance(std::vector<RegRow> rows);

  Eigen::Index dim() const { return dim_; }
  // Stacks the rows at the given positions into (A, b).
  void stack(std::span<const std::size_t> positions, Eigen::MatrixXd& a, Eigen::VectorXd& b) const;

 private:
  Eigen::Index dim_ = 0;
};

// k tuple-retaining subsets of an instance. Member lists are sorted and de-duplicated.
class HypotheticalSet {
 public:
  HypotheticalSet() = default;
  explicit HypotheticalSet(std::vector<std::vector<TupleId>> members);

  std::size_t k() const { return members_.size(); }
  std::span<const TupleId> members(std::size_t i) const { return members_.at(i); }
  const std::vector<std::vector<TupleId>>& all() const { return members_; }

  // Member lists translated to positions of `store`; dangling ids are dropped.
  template <typename Store>
  std::vector<std::vector<std::size_t>> positions(const Store& store) const {
    std::vector<std::vector<std::size_t>> out(k());
    for (std::size_t i = 0; i < k(); ++i) {
      out[i].reserve(members_[i].size());
      for (TupleId id : members_[i])
        if (auto p = store.position(id)) out[i].push_back(*p);
      std::sort(out[i].begin(), out[i].end());
    }
    return out;
  }

 private:
  std::vector<std::vector<TupleId>> members_;
};

// A non-empty set of hypotheticals turned on; stored 0-based and sorted.
class Scenario {
 public:
  Scenario() = default;
  explicit Scenario(std::vector<std::size_t> on);

  static Scenario from_one_based(std::span<const long long> indices);
  static Scenario parse(std::string_view text);  // "1,3,5"

  // Throws EmptyScenario / UnknownHypothetical.
  void check(std::size_t k) const;

  std::span<const std::size_t> on() const { return on_; }
  std::size_t size() const { return on_.size(); }
  bool contains(std::size_t i) const;
  std::vector<long long> one_based() const;
  std::string to_string() const;

 private:
  std::vector<std::size_t> on_;
};

// Every non-empty scenario over k hypotheticals, in bitmask order.
std::vector<Scenario> all_scenarios(std::size_t k);

// Dynamic bit set over hypothetical indices (characteristic vectors, scenario masks).
class HypMask {
 public:
  HypMask() = default;
  explicit HypMask(std::size_t k) : k_(k), words_((k + 63) / 64, 0) {}
  HypMask(std::size_t k, const Scenario& s);

  std::size_t size() const { return k_; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  bool any() const;
  // Lowest index set in both masks, or size() when disjoint.
  std::size_t first_common(const HypMask& other) const;
  std::span<const std::uint64_t> words() const { return words_; }

  bool operator==(const HypMask&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> words_;
};

// Characteristic vector of each instance position across the hypotheticals.
std::vector<HypMask> memberships(std::size_t n, const std::vector<std::vector<std::size_t>>& members);

// Sorted union of the member ids of the on-hypotheticals.
std::vector<TupleId> scenario_ids(const HypotheticalSet& h, const Scenario& s);

Instance apply_scenario(const Instance& inst, const HypotheticalSet& h, const Scenario& s);
RegInstance apply_scenario(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s);

struct Diagnostics {
  std::vector<TupleId> duplicate_ids;
  std::vector<std::pair<std::size_t, TupleId>> dangling;  // (hypothetical, id)
  std::vector<TupleId> non_positive_weights;
  std::vector<std::size_t> empty_hypotheticals;
  bool disjoint = true;

  bool ok_for_aggregates() const {
    return duplicate_ids.empty() && dangling.empty() && non_positive_weights.empty();
  }
  bool ok_for_relations() const { return duplicate_ids.empty() && dangling.empty(); }
  std::string summary() const;
};

// Duplicate ids must be checked on the raw rows; the store keeps only the first.
Diagnostics validate(std::span<const Tuple> tuples, const HypotheticalSet& h);
Diagnostics validate(std::span<const RegRow> rows, const HypotheticalSet& h);

// Deterministic generator for a named substream of a seed.
std::mt19937_64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

// Stream tags used to keep sketch families independent under one seed.
namespace stream {
inline constexpr std::uint64_t kCount = 0x434e54;
inline constexpr std::uint64_t kSum = 0x53554d;
inline constexpr std::uint64_t kQuantile = 0x51544c;
inline constexpr std::uint64_t kRegression = 0x524547;
inline constexpr std::uint64_t kGroup = 0x475250;
}  // namespace stream

}  // namespace whatif
