#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drrules/colgen.hpp"
#include "drrules/dataset.hpp"
#include "drrules/dro.hpp"
#include "drrules/rules.hpp"

namespace drrules {

struct TrainConfig {
  int cprime = 5;                   // per-member rule-set complexity budget
  int cmax = 30;                    // ensemble complexity cap
  double rho = 0.05;                // divergence-ball radius
  std::string divergence = "chi2";  // chi2 | kl
  double delta = 0.0;               // separation margin; <= 0 derives 1/(2*floor(C/cprime))
  int patience = 20;                // outer iterations without improvement before stopping
  double improve_thresh = 0.005;    // relative improvement that counts as progress
  double ensemble_ip_time_s = 600.0;
  long ensemble_ip_node_budget = 500'000;
  std::string weights_for_ip = "p0";  // p0 | pn: point weights in the selection IP
  ColgenConfig colgen;
  std::uint64_t seed = 1;    // recorded provenance; training itself is deterministic
  int max_outer_iters = 500;  // safety valve above the patience rule
  std::ostream* trace = nullptr;
};

// Equal-weight collection F_n = (1/n) sum h_k with its running worst-case
// reweighting. Aggregates are integer member-fire counts so F_n(x_i) is
// exact on the lattice {0, 1/n, ..., 1}.
class Collection {
 public:
  Collection(const BinaryDataset& data, RobustBall ball);

  void add_member(RuleSet h);  // updates aggregate and recomputes P^n
  int size() const { return static_cast<int>(members_.size()); }
  const std::vector<RuleSet>& members() const { return members_; }
  double aggregate_value(std::size_t i) const;  // F_n(x_i); 0 when empty
  std::vector<double> margin_losses() const;    // per-point loss of F_n
  const Pmf& worst_case() const { return pn_; }  // P^n; uniform when empty
  double robust_value() const { return robust_value_; }
  double empirical_margin_loss() const;  // mean margin loss under uniform weights
  const BinaryDataset& data() const { return *data_; }
  const RobustBall& ball() const { return ball_; }

 private:
  const BinaryDataset* data_;
  RobustBall ball_;
  std::vector<RuleSet> members_;
  std::vector<std::int32_t> fires_;  // per point: members voting 1
  Pmf pn_;
  double robust_value_ = 0.0;
};

// One boosting step: minimize the P^{n-1}-weighted rule-set loss by column
// generation, add the member, and refresh the worst-case weights.
ColgenResult grow_step(Collection& col, ColumnPool& pool, const ColgenConfig& cfg);

struct SelectResult {
  Ensemble ensemble;
  double objective = 0.0;  // weighted soft-margin violation sum
  bool exact = false;      // branch-and-bound tree exhausted
  long nodes = 0;
};

// Sparse convex combination over the collection: binary member selection w,
// weights v <= w with sum v = 1, margin constraints at 1/2 +- delta with
// weighted slack, total selected complexity <= c_budget.
// Throws if members is empty, delta outside (0, 1/2), or c_budget below the
// cheapest member.
SelectResult select_sparse(const std::vector<RuleSet>& members, const BinaryDataset& data,
                           const Pmf& p, int c_budget, double delta, double time_limit_s,
                           long node_budget);

struct OuterRecord {
  int iter = 0;  // 1-based
  double rmlp_objective = 0.0;
  double member_ip_objective = 0.0;
  int member_rules = 0;
  double robust_loss = 0.0;
  double empirical_loss = 0.0;
  double inner_best_objective = 0.0;
  int inner_best_c = 0;
  bool improved = false;
};

struct TrainedModel {
  Ensemble ensemble;
  std::optional<int> constant;  // set when the dataset had a single label
  std::vector<OuterRecord> history;
  TrainConfig config;  // provenance echo
  std::uint64_t dataset_fingerprint = 0;
  std::size_t n_train = 0;
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  double train_objective = 0.0;  // best selection-IP objective
  int chosen_c = 0;
  int chosen_iter = 0;

  int predict_row(const std::uint8_t* row, std::size_t d) const;
  double accuracy(const BinaryDataset& ds) const;  // fraction in [0,1]
};

// Full adaptive procedure: grow the collection one rule set per outer
// iteration; after each, sweep the selection IP over budgets C = m*cprime
// (m = 2, 3, ... up to cmax) until the objective stops improving; stop the
// outer loop after `patience` iterations without relative improvement and
// return the best model seen (ties: smaller C, then earlier iteration).
TrainedModel train(const BinaryDataset& ds, const TrainConfig& cfg);

// Derived separation margin for a budget C when none is configured.
double effective_delta(double configured, int c_budget, int cprime);

struct CyclingRecord {
  int iter = 0;                     // 1-based
  std::array<long, 2> inst{};      // point counts at 0-1 loss 0 and 1
  std::array<long, 21> average{};  // running-average-loss histogram, bins k/20
};

// Diagnostic loop without aggregation: each iteration reweights directly
// from the current rule set's 0-1 losses, exhibiting the cycling pathology
// that the margin loss is designed to avoid.
std::vector<CyclingRecord> cycling_diagnostic(const BinaryDataset& ds, const RobustBall& ball,
                                              const ColgenConfig& cfg, int n_iters);

}  // namespace drrules
