#include <vector>

#include "doctest.h"
#include "drrules/rules.hpp"

using namespace drrules;

namespace {

Conjunction conj(std::vector<Literal> lits) { return Conjunction::make(std::move(lits)); }

}  // namespace

TEST_CASE("conjunction evaluation and canonical form") {
  const std::uint8_t row[4] = {1, 0, 1, 1};
  Conjunction c = conj({{2, 1}, {0, 1}});
  CHECK(c.eval(row, 4));
  CHECK(c.literals()[0].feature == 0);  // sorted by feature
  CHECK(c.literals()[1].feature == 2);

  Conjunction miss = conj({{1, 1}});
  CHECK_FALSE(miss.eval(row, 4));
  Conjunction negated = conj({{1, 0}});
  CHECK(negated.eval(row, 4));

  CHECK_THROWS_AS(Conjunction::make({}), std::runtime_error);
  CHECK_THROWS_AS(Conjunction::make({{0, 1}, {0, 0}}), std::runtime_error);  // repeated feature
  CHECK_THROWS_AS(Conjunction::make({{0, 2}}), std::runtime_error);          // value outside {0,1}
  CHECK_THROWS_AS(c.eval(row, 2), std::runtime_error);                       // feature beyond d
}

TEST_CASE("complexity is literals plus one per rule, M plus literal total per set") {
  Conjunction one = conj({{0, 1}});
  Conjunction three = conj({{0, 1}, {1, 0}, {2, 1}});
  CHECK(one.complexity() == 2);
  CHECK(three.complexity() == 4);

  RuleSet h = RuleSet::make({one, three});
  CHECK(h.complexity() == 2 + 4);  // M=2 rules + 4 literals
  CHECK(RuleSet{}.complexity() == 0);
}

TEST_CASE("rule set is a disjunction; the empty set predicts 0") {
  const std::uint8_t row[3] = {0, 1, 0};
  RuleSet h = RuleSet::make({conj({{0, 1}}), conj({{1, 1}})});
  CHECK(h.eval(row, 3) == 1);  // second rule fires
  RuleSet never = RuleSet::make({conj({{0, 1}, {2, 1}})});
  CHECK(never.eval(row, 3) == 0);
  CHECK(RuleSet{}.eval(row, 3) == 0);
  CHECK_THROWS_AS(RuleSet::make({conj({{0, 1}}), conj({{0, 1}})}), std::runtime_error);
}

TEST_CASE("ensembles renormalize, prune, and predict 1 on the 1/2 tie") {
  RuleSet a = RuleSet::make({conj({{0, 1}})});
  RuleSet b = RuleSet::make({conj({{1, 1}})});
  Ensemble e = Ensemble::make({{a, 2.0}, {b, 2.0}});  // renormalized to 1/2 each
  const std::uint8_t only_a[2] = {1, 0};
  const std::uint8_t both[2] = {1, 1};
  const std::uint8_t neither[2] = {0, 0};
  CHECK(e.value(only_a, 2) == doctest::Approx(0.5));
  CHECK(e.predict(only_a, 2) == 1);  // tie goes to 1
  CHECK(e.predict(both, 2) == 1);
  CHECK(e.predict(neither, 2) == 0);
  CHECK(e.complexity() == 4);

  Ensemble pruned = Ensemble::make({{a, 1.0}, {b, 1e-12}});
  CHECK(pruned.members().size() == 1);
  CHECK_THROWS_AS(Ensemble::make({{a, 0.0}}), std::runtime_error);
  CHECK_NOTHROW(e.validate());
}

TEST_CASE("margin loss charges |F-1/2| only on misclassified points") {
  // Correctly classified: no loss.
  CHECK(margin_loss(0.8, 1) == 0.0);
  CHECK(margin_loss(0.2, 0) == 0.0);
  // Misclassified: distance from the threshold.
  CHECK(margin_loss(0.8, 0) == doctest::Approx(0.3));
  CHECK(margin_loss(0.2, 1) == doctest::Approx(0.3));
  // Exactly at 1/2 the prediction is 1: no loss on y=1, zero-margin loss on y=0.
  CHECK(margin_loss(0.5, 1) == 0.0);
  CHECK(margin_loss(0.5, 0) == 0.0);
  // Extremes reach the 1/2 cap.
  CHECK(margin_loss(1.0, 0) == doctest::Approx(0.5));
  CHECK(margin_loss(0.0, 1) == doctest::Approx(0.5));
  for (double f : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    for (int y : {0, 1}) {
      double l = margin_loss(f, y);
      CHECK(l >= 0.0);
      CHECK(l <= 0.5);
    }
  }
}

TEST_CASE("dnf loss and value-threshold prediction") {
  CHECK(dnf_loss(1, 1) == 0);
  CHECK(dnf_loss(0, 1) == 1);
  CHECK(dnf_loss(1, 0) == 1);
  CHECK(dnf_loss(0, 0) == 0);
  CHECK(predict_value(0.5) == 1);
  CHECK(predict_value(0.49) == 0);
}

TEST_CASE("describe renders literals against feature names") {
  std::vector<FeatureMeta> meta = {{"age", BinOp::Greater, 50, ""},
                                   {"cp", BinOp::EqCat, 0, "4"}};
  Conjunction c = conj({{0, 1}, {1, 0}});
  CHECK(c.describe(&meta) == "(age>50 AND !(cp==4))");
  CHECK(c.describe(nullptr) == "(f0=1 AND f1=0)");
}

TEST_CASE("rule sets order canonically and compare") {
  RuleSet a = RuleSet::make({conj({{1, 1}}), conj({{0, 1}})});
  RuleSet b = RuleSet::make({conj({{0, 1}}), conj({{1, 1}})});
  CHECK(a == b);  // construction order does not matter
  RuleSet c = RuleSet::make({conj({{0, 1}})});
  CHECK(a != c);
}
