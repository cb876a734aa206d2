#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "whatif/complex_query.hpp"
#include "whatif/core.hpp"

namespace whatif::oracle {

// Exact answers computed on apply_scenario output. These are the ground truth the
// sketches are measured against; they share the (weight, id) order and the
// minimum-norm convention with the sketches.

std::uint64_t count(const Instance& inst, const HypotheticalSet& h, const Scenario& s);
double sum(const Instance& inst, const HypotheticalSet& h, const Scenario& s);
// Throws EmptyScenarioResult.
double average(const Instance& inst, const HypotheticalSet& h, const Scenario& s);

// I|S sorted by (weight, id).
std::vector<Tuple> sorted_result(const Instance& inst, const HypotheticalSet& h, const Scenario& s);

struct RankedTuple {
  Tuple tuple;
  std::size_t rank = 0;
};

// Tuple of rank ceil(phi |I|S|). Throws EmptyScenarioResult.
RankedTuple quantile(const Instance& inst, const HypotheticalSet& h, const Scenario& s, double phi);
// Number of tuples of I|S with weight <= x.
std::size_t rank_of(const Instance& inst, const HypotheticalSet& h, const Scenario& s, double x);
// Rank of tuple `id` in I|S under (weight, id); 0 when absent.
std::size_t rank_of_tuple(const Instance& inst, const HypotheticalSet& h, const Scenario& s, TupleId id);

struct RegressionOptimum {
  Eigen::VectorXd coefficients;
  double residual = 0.0;
};

RegressionOptimum regression(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s);
// ||A x - b|| over the rows of I|S.
double residual(const RegInstance& inst, const HypotheticalSet& h, const Scenario& s, const Eigen::VectorXd& x);

// Exact grouped answers: eval_ucq on I|S, group, then the exact numeric query per group.
std::vector<GroupRow> complex(const Instance& inst, const HypotheticalSet& h, const ComplexQuery& q,
                              const Scenario& s, const AnswerParams& params);

}  // namespace whatif::oracle
