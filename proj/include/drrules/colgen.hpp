#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <vector>

#include "drrules/dataset.hpp"
#include "drrules/rules.hpp"
#include "drrules/solver.hpp"

namespace drrules {

// Pool of generated conjunction columns with incidence cached against one
// fixed training set: which label-1 points each covers and which label-0
// points it miscovers.
class ColumnPool {
 public:
  struct Entry {
    Conjunction conj;
    std::vector<std::int32_t> cover_pos;  // label-1 rows covered
    std::vector<std::int32_t> cover_neg;  // label-0 rows covered
    int cost = 0;                         // literals + 1
  };

  explicit ColumnPool(const BinaryDataset& data);

  // Returns the new entry index, or -1 if the conjunction is already pooled.
  int add(const Conjunction& c);
  bool contains(const Conjunction& c) const;
  const std::vector<Entry>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const BinaryDataset& data() const { return *data_; }

 private:
  const BinaryDataset* data_;
  std::vector<Entry> entries_;
  std::set<std::vector<Literal>> keys_;
};

struct ColgenConfig {
  int cprime = 5;        // rule-set complexity budget
  int max_literals = 0;  // per-rule literal cap; 0 means cprime - 1
  int max_rounds = 5;    // pricing rounds per generate_ruleset call
  int columns_per_round = 10;
  double pricing_time_s = 30.0;
  long pricing_node_budget = 2'000'000;
  double total_time_s = 300.0;
  double ip_floor_s = 10.0;  // master IP always gets at least this much
  long ip_node_budget = 200'000;
  std::ostream* trace = nullptr;  // optional machine-readable progress lines

  int literal_cap() const { return max_literals > 0 ? max_literals : cprime - 1; }
};

// Restricted master LP: one xi per label-1 point (xi_i + P_i sum_{k in K_i}
// w_k >= P_i), one complexity row (sum c_k w_k <= cprime), w_k in [0,1],
// objective sum xi_i + sum_k (sum_{i in Z_k} P_i) w_k.
// Throws if the pool is empty or the dataset has no label-1 points.
LpProblem build_master(const ColumnPool& pool, const Pmf& p, int cprime);

// sum_{i: y=0} P_i delta_i - sum_{i: y=1} P_i mu_i delta_i + lambda c_k,
// with mu indexed by training point (zero for label-0 points).
double reduced_cost(const ColumnPool::Entry& entry, const std::vector<double>& mu_by_point,
                    double lambda, const Pmf& p);

struct PricingOutcome {
  std::vector<Conjunction> columns;  // negative-reduced-cost rules, best first
  double best_value = 0.0;           // lowest objective value encountered
  bool exact = true;                 // search tree fully exhausted
  long nodes = 0;
};

// Branch-and-bound search for conjunctions minimizing
//   lambda (1 + |t|) - sum_{y=1} P_i mu_i delta_i(t) + sum_{y=0} P_i delta_i(t)
// over conjunctions with at most cfg.literal_cap() literals. A greedy
// literal-append pass warm-starts the tree; up to cfg.columns_per_round
// improving columns are kept.
PricingOutcome solve_pricing(const BinaryDataset& data, const Pmf& p,
                             const std::vector<double>& mu_by_point, double lambda,
                             const ColgenConfig& cfg);

struct ColgenResult {
  RuleSet ruleset;
  double lp_objective = 0.0;     // final restricted master LP value
  double ip_objective = 0.0;     // master IP value: the weighted Hamming bound
  double pricing_bound = 0.0;    // best pricing objective in the final round
  bool lp_converged = false;     // pricing proved no improving column exists
  bool ip_exact = false;         // master IP tree exhausted
  bool flagged_infeasible = false;
  int rounds = 0;
  long pricing_nodes = 0;
  long ip_nodes = 0;
};

// Column generation for min_{h: c(h) <= cprime} E_P |h(x) - y|: alternate
// restricted-master solves with pricing, then fix the selection with the
// master IP over the generated pool. The pool is seeded with single-literal
// rules of weighted precision above 1/2 (or the single best literal) and
// persists across calls so later invocations reuse earlier columns.
ColgenResult generate_ruleset(const BinaryDataset& data, const Pmf& p, ColumnPool& pool,
                              const ColgenConfig& cfg);

}  // namespace drrules
