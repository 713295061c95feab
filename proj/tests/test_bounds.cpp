#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "drrules/bounds.hpp"

using namespace drrules;

TEST_CASE("generalization gap at a reference configuration") {
  // sqrt((2/100) * (4 log 5 + log 20)), evaluated independently.
  CHECK(prop1_gap(100, 10, 5, 0.05) == doctest::Approx(0.43436123038987706).epsilon(1e-12));
  // Quadrupling the sample halves the gap exactly (the N only scales the root).
  CHECK(prop1_gap(400, 10, 5, 0.05) ==
        doctest::Approx(prop1_gap(100, 10, 5, 0.05) / 2.0).epsilon(1e-12));
}

TEST_CASE("gap shrinks with more data and looser confidence, grows with budget") {
  const double base = prop1_gap(200, 15, 6, 0.05);
  CHECK(prop1_gap(800, 15, 6, 0.05) < base);
  CHECK(prop1_gap(200, 15, 6, 0.2) < base);   // larger delta -> smaller log(1/delta)
  CHECK(prop1_gap(200, 15, 6, 0.01) > base);
  double prev = 0.0;
  for (int c = 2; c <= 8; ++c) {
    const double g = prop1_gap(200, 15, c, 0.05);
    CHECK(g > prev);  // holds while 2d/(C-1) stays above e
    prev = g;
  }
}

TEST_CASE("class-size bounds: C = 2 counts single literals exactly") {
  const SizeBounds b = size_bounds(10, 2);
  // Complexity-2 rule sets are exactly the 2d one-literal rules.
  CHECK(b.lower == doctest::Approx(std::log(20.0)).epsilon(1e-15));
  CHECK(b.lower == doctest::Approx(2.995732273553991).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(3.995732273553991).epsilon(1e-12));
  // The upper bound exceeds the lower by exactly C-1 nats.
  for (int c : {2, 3, 5, 9}) {
    const SizeBounds s = size_bounds(12, c);
    CHECK(s.lower < s.upper);
    CHECK(s.upper - s.lower == doctest::Approx(static_cast<double>(c - 1)).epsilon(1e-12));
  }
}

TEST_CASE("margin-rate ingredients at a reference configuration") {
  const Prop2Ingredients ing = prop2_ingredients(500, 20, 5, 0.1, 0.05);
  CHECK(ing.log_h == doctest::Approx(9.210340371976184).epsilon(1e-12));
  CHECK(ing.m == 1598);
  CHECK(ing.delta_m == doctest::Approx(1.956792457113066e-8).epsilon(1e-12));
  CHECK(ing.lambda_m == doctest::Approx(3.83969405320834).epsilon(1e-12));
  // delta_m has the telescoping form delta / (M (M+1)).
  CHECK(ing.delta_m ==
        doctest::Approx(0.05 / (1598.0 * 1599.0)).epsilon(1e-12));
}

TEST_CASE("halving the margin roughly quadruples the ensemble size") {
  const Prop2Ingredients a = prop2_ingredients(500, 20, 5, 0.1, 0.05);
  const Prop2Ingredients b = prop2_ingredients(500, 20, 5, 0.05, 0.05);
  CHECK(b.m == 6391);
  const double ratio = static_cast<double>(b.m) / static_cast<double>(a.m);
  CHECK(ratio > 3.99);
  CHECK(ratio < 4.01);
  CHECK(b.lambda_m > a.lambda_m);  // more committee members, slower rate
}

TEST_CASE("ingredients stay internally consistent across a grid") {
  for (std::size_t n : {200u, 1000u, 5000u}) {
    for (int d : {10, 40}) {
      for (int cprime : {3, 5}) {
        for (double margin : {0.08, 0.25}) {
          const Prop2Ingredients ing = prop2_ingredients(n, d, cprime, margin, 0.05);
          // Recompute every piece from scratch at 1e-12 relative tolerance.
          const double log_h =
              (cprime - 1) * std::log(2.0 * d / static_cast<double>(cprime - 1));
          CHECK(ing.log_h == doctest::Approx(log_h).epsilon(1e-12));
          const double m_real =
              4.0 / (margin * margin) * std::log(static_cast<double>(n) / log_h);
          CHECK(ing.m == static_cast<long>(std::ceil(m_real)));
          const double dm = static_cast<double>(ing.m);
          CHECK(ing.delta_m == doctest::Approx(0.05 * (1.0 / dm - 1.0 / (dm + 1.0))).epsilon(1e-12));
          const double lam = std::sqrt(
              (std::log(dm + 1.0) + dm * log_h - std::log(ing.delta_m)) /
              (2.0 * static_cast<double>(n)));
          CHECK(ing.lambda_m == doctest::Approx(lam).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("precondition violations are rejected with clear errors") {
  CHECK_THROWS_AS(prop1_gap(0, 10, 5, 0.05), std::runtime_error);
  CHECK_THROWS_AS(prop1_gap(100, 10, 1, 0.05), std::runtime_error);
  CHECK_THROWS_AS(prop1_gap(100, 2, 6, 0.05), std::runtime_error);  // 2d <= C-1
  CHECK_THROWS_AS(prop1_gap(100, 10, 5, 0.0), std::runtime_error);
  CHECK_THROWS_AS(prop1_gap(100, 10, 5, 1.0), std::runtime_error);
  CHECK_THROWS_AS(size_bounds(2, 6), std::runtime_error);
  CHECK_THROWS_AS(size_bounds(10, 0), std::runtime_error);
  CHECK_THROWS_AS(prop2_ingredients(500, 20, 5, 0.0, 0.05), std::runtime_error);
  CHECK_THROWS_AS(prop2_ingredients(500, 20, 5, 1.0, 0.05), std::runtime_error);
  CHECK_THROWS_AS(prop2_ingredients(500, 20, 5, 0.1, 0.0), std::runtime_error);
  // log|H| = 39 log(100/39) ~ 36.7 exceeds N = 30: the rate is undefined.
  CHECK_THROWS_AS(prop2_ingredients(30, 50, 40, 0.1, 0.05), std::runtime_error);
  CHECK_NOTHROW(prop2_ingredients(37, 50, 40, 0.1, 0.05));
}
