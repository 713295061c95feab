#pragma once
// Rule representation and evaluation.
//
// A Literal tests one binary feature for a required value. A Conjunction is
// an AND of literals over distinct features with cost |literals| + 1. A
// RuleSet is an OR of conjunctions (a DNF classifier) with cost
// M + sum of literal counts. An Ensemble is a convex combination of rule
// sets, predicting 1 when the weighted vote reaches 1/2 (ties predict 1).

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "drrules/dataset.hpp"

namespace drrules {

struct Literal {
  std::int32_t feature = 0;
  std::uint8_t value = 1;  // required bit

  auto operator<=>(const Literal&) const = default;
};

class Conjunction {
 public:
  Conjunction() = default;
  // Sorts literals by feature index; throws if empty, if a feature repeats,
  // or if a value is outside {0,1}.
  static Conjunction make(std::vector<Literal> literals);

  const std::vector<Literal>& literals() const { return literals_; }
  int size() const { return static_cast<int>(literals_.size()); }
  int complexity() const { return size() + 1; }

  // True iff every literal matches. Throws on a feature index >= d.
  bool eval(const std::uint8_t* row, std::size_t d) const;
  bool eval(const BinaryDataset& ds, std::size_t i) const { return eval(ds.row(i), ds.d); }

  std::string describe(const std::vector<FeatureMeta>* meta) const;
  auto operator<=>(const Conjunction&) const = default;

 private:
  std::vector<Literal> literals_;  // sorted by feature; features distinct
};

class RuleSet {
 public:
  RuleSet() = default;
  // Sorts rules canonically; throws on duplicate conjunctions.
  static RuleSet make(std::vector<Conjunction> rules);

  const std::vector<Conjunction>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  int complexity() const;  // M + sum of literal counts

  // Disjunction of the conjunctions; the empty rule set returns 0.
  int eval(const std::uint8_t* row, std::size_t d) const;
  int eval(const BinaryDataset& ds, std::size_t i) const { return eval(ds.row(i), ds.d); }

  auto operator<=>(const RuleSet&) const = default;

 private:
  std::vector<Conjunction> rules_;  // canonically sorted, distinct
};

class Ensemble {
 public:
  struct Member {
    RuleSet h;
    double weight = 0;
  };

  Ensemble() = default;
  // Keeps only members with weight > 1e-9, renormalizes to sum 1.
  // Throws if no positive-weight member remains.
  static Ensemble make(std::vector<Member> members);

  const std::vector<Member>& members() const { return members_; }
  int complexity() const;  // sum of member rule-set complexities

  // Weighted vote F(x) in [0,1].
  double value(const std::uint8_t* row, std::size_t d) const;
  double value(const BinaryDataset& ds, std::size_t i) const { return value(ds.row(i), ds.d); }

  // Threshold-1/2 prediction; F(x) = 1/2 predicts 1.
  int predict(const std::uint8_t* row, std::size_t d) const {
    return value(row, d) >= 0.5 ? 1 : 0;
  }
  int predict(const BinaryDataset& ds, std::size_t i) const { return predict(ds.row(i), ds.d); }

  // Throws unless weights are positive and sum to 1 within 1e-9.
  void validate() const;

 private:
  std::vector<Member> members_;
};

// 0/1 misclassification loss of a rule set.
inline int dnf_loss(int h_of_x, int y) { return h_of_x == y ? 0 : 1; }

// Margin loss used by the robust reweighting: |F(x) - 1/2| when the
// thresholded prediction is wrong, else 0. Always in [0, 1/2]; exactly 0 at
// the F(x) = 1/2 tie regardless of the label.
double margin_loss(double f_value, int y);

// Convenience: prediction implied by an aggregate value.
inline int predict_value(double f_value) { return f_value >= 0.5 ? 1 : 0; }

}  // namespace drrules
