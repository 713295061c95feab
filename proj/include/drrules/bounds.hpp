#pragma once

#include <cstddef>

namespace drrules {

// Closed-form diagnostics relating sample size, feature count, and rule
// complexity budgets to generalization-gap estimates.

// sqrt((2/N) ((C-1) log(2d/(C-1)) + log(1/delta))).
// Requires N >= 1, C >= 2, 2d > C-1, delta in (0,1).
double prop1_gap(std::size_t n, int d, int c, double delta);

struct SizeBounds {
  double lower = 0.0;  // (C-1) log(2d/(C-1)); exact at C=2
  double upper = 0.0;  // (C-1) log(2de/(C-1)), constant offset treated as 0
};

// Bounds on the log-cardinality of the class of rule sets with complexity
// at most C over d binary features. Requires C >= 2 and 2d > C-1.
SizeBounds size_bounds(int d, int c);

struct Prop2Ingredients {
  long m = 0;            // ceil((4/margin^2) log(N / log|H|))
  double delta_m = 0.0;  // delta (1/M - 1/(M+1))
  double lambda_m = 0.0;  // sqrt((1/2N)(log(M+1) + M log|H| - log delta_m))
  double log_h = 0.0;     // lower bound on log|H(cprime)| used throughout
};

// Explicit margin-rate ingredients. Requires margin, delta in (0,1) and
// N > log|H(cprime)| (reported as an error otherwise).
Prop2Ingredients prop2_ingredients(std::size_t n, int d, int cprime, double margin, double delta);

}  // namespace drrules
