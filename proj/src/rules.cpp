#include "drrules/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drrules {

Conjunction Conjunction::make(std::vector<Literal> literals) {
  if (literals.empty()) throw std::runtime_error("conjunction: needs at least one literal");
  std::sort(literals.begin(), literals.end());
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (literals[i].value > 1) throw std::runtime_error("conjunction: literal value must be 0 or 1");
    if (literals[i].feature < 0) throw std::runtime_error("conjunction: negative feature index");
    if (i > 0 && literals[i].feature == literals[i - 1].feature) {
      throw std::runtime_error("conjunction: feature " + std::to_string(literals[i].feature) +
                               " appears twice");
    }
  }
  Conjunction c;
  c.literals_ = std::move(literals);
  return c;
}

bool Conjunction::eval(const std::uint8_t* row, std::size_t d) const {
  for (const auto& lit : literals_) {
    if (static_cast<std::size_t>(lit.feature) >= d) {
      throw std::runtime_error("conjunction: feature index " + std::to_string(lit.feature) +
                               " out of range (d=" + std::to_string(d) + ")");
    }
    if (row[lit.feature] != lit.value) return false;
  }
  return true;
}

std::string Conjunction::describe(const std::vector<FeatureMeta>* meta) const {
  std::string out = "(";
  for (std::size_t i = 0; i < literals_.size(); ++i) {
    if (i) out += " AND ";
    const auto& lit = literals_[i];
    if (meta && static_cast<std::size_t>(lit.feature) < meta->size()) {
      const std::string name = (*meta)[static_cast<std::size_t>(lit.feature)].display_name();
      out += lit.value ? name : "!(" + name + ")";
    } else {
      out += "f" + std::to_string(lit.feature) + "=" + (lit.value ? "1" : "0");
    }
  }
  return out + ")";
}

RuleSet RuleSet::make(std::vector<Conjunction> rules) {
  std::sort(rules.begin(), rules.end());
  for (std::size_t i = 1; i < rules.size(); ++i) {
    if (rules[i] == rules[i - 1]) throw std::runtime_error("rule set: duplicate conjunction");
  }
  RuleSet h;
  h.rules_ = std::move(rules);
  return h;
}

int RuleSet::complexity() const {
  int c = static_cast<int>(rules_.size());
  for (const auto& r : rules_) c += r.size();
  return c;
}

int RuleSet::eval(const std::uint8_t* row, std::size_t d) const {
  for (const auto& r : rules_) {
    if (r.eval(row, d)) return 1;
  }
  return 0;
}

Ensemble Ensemble::make(std::vector<Member> members) {
  std::vector<Member> kept;
  double total = 0;
  for (auto& m : members) {
    if (m.weight > 1e-9) {
      total += m.weight;
      kept.push_back(std::move(m));
    }
  }
  if (kept.empty()) throw std::runtime_error("ensemble: no member with positive weight");
  for (auto& m : kept) m.weight /= total;
  Ensemble f;
  f.members_ = std::move(kept);
  return f;
}

int Ensemble::complexity() const {
  int c = 0;
  for (const auto& m : members_) c += m.h.complexity();
  return c;
}

double Ensemble::value(const std::uint8_t* row, std::size_t d) const {
  double f = 0;
  for (const auto& m : members_) {
    if (m.h.eval(row, d)) f += m.weight;
  }
  return f;
}

void Ensemble::validate() const {
  double total = 0;
  for (const auto& m : members_) {
    if (!(m.weight > 0)) throw std::runtime_error("ensemble: non-positive member weight");
    total += m.weight;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw std::runtime_error("ensemble: weights sum to " + std::to_string(total));
  }
}

double margin_loss(double f_value, int y) {
  const int pred = predict_value(f_value);
  if (pred == y) return 0.0;
  return std::fabs(f_value - 0.5);
}

}  // namespace drrules
