#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "drrules/dataset.hpp"

namespace drrules {

// A phi-divergence D(P || P0) = (1/N) * sum_i phi(N * P_i) for P0 uniform.
// The adversary maximizes a linear objective over the ball D <= rho.
struct Divergence {
  std::string name;
  std::function<double(double)> phi;            // phi(s), s >= 0
  std::function<double(double)> phi_prime;      // phi'(s), s > 0
  std::function<double(double)> phi_prime_inv;  // (phi')^{-1}(u), clamped to s >= 0
  std::function<double(double)> phi_conj;       // phi*(u) = sup_s { s*u - phi(s) }
  double phi_prime_at_zero;                     // lim_{s->0+} phi'(s); -inf if unbounded

  static Divergence chi2();
  static Divergence kl();
  static Divergence by_name(const std::string& name);  // "chi2" | "kl"
};

struct RobustBall {
  Divergence div;
  double rho = 0.05;
  double eps = 1e-8;  // bisection tolerance on the dual variables
};

struct RobustSolution {
  Pmf p;
  double alpha = 0.0;   // dual of the divergence constraint (0 in case 1)
  double lambda = 0.0;  // dual of the normalization constraint
  double value = 0.0;   // achieved objective sum_i p_i z_i
  bool case1 = false;   // optimum puts all mass on the argmax set
};

// D(P || uniform) for the given divergence.
double divergence_value(const Divergence& div, const Pmf& p);

// max_P sum_i P_i z_i  s.t.  (1/N) sum_i phi(N P_i) <= rho, P in simplex.
// Deterministic; throws on empty z or rho <= 0.
RobustSolution maximize_robust_loss(const std::vector<double>& z, const RobustBall& ball);

}  // namespace drrules
