#include "drrules/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "drrules/common.hpp"

namespace drrules {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();
constexpr double kEqualTol = 1e-14;   // treat z as constant below this spread
constexpr double kArgmaxTol = 1e-12;  // membership window for the argmax set

long bisection_cap(double range, double eps) {
  if (!(range > 0) || !(eps > 0)) return 64;
  return 64 + static_cast<long>(std::ceil(std::log2(std::max(range / eps, 1.0))));
}
}  // namespace

Divergence Divergence::chi2() {
  Divergence d;
  d.name = "chi2";
  d.phi = [](double s) { return (s - 1.0) * (s - 1.0); };
  d.phi_prime = [](double s) { return 2.0 * (s - 1.0); };
  d.phi_prime_inv = [](double u) { return std::max(0.0, 1.0 + u / 2.0); };
  d.phi_conj = [](double u) { return u >= -2.0 ? u + u * u / 4.0 : -1.0; };
  d.phi_prime_at_zero = -2.0;
  return d;
}

Divergence Divergence::kl() {
  Divergence d;
  d.name = "kl";
  d.phi = [](double s) { return s <= 0.0 ? 1.0 : s * std::log(s) - s + 1.0; };
  d.phi_prime = [](double s) { return std::log(s); };
  d.phi_prime_inv = [](double u) { return std::exp(u); };
  d.phi_conj = [](double u) { return std::expm1(u); };
  d.phi_prime_at_zero = -kInfty;
  return d;
}

Divergence Divergence::by_name(const std::string& name) {
  if (name == "chi2") return chi2();
  if (name == "kl") return kl();
  throw std::runtime_error("unknown divergence '" + name + "' (expected chi2 or kl)");
}

double divergence_value(const Divergence& div, const Pmf& p) {
  const double n = static_cast<double>(p.p.size());
  double acc = 0;
  for (double pi : p.p) acc += div.phi(n * pi);
  return acc / n;
}

namespace {

// For fixed alpha > 0 find lambda with sum_i P_i(alpha, lambda) = 1 and
// return the (unnormalized) weights. P_i = (1/N) (phi')^{-1}((z_i-lambda)/alpha).
struct InnerResult {
  double lambda;
  std::vector<double> p;
};

InnerResult solve_lambda(const std::vector<double>& z, const Divergence& div, double alpha,
                         double eps, double zmin, double zmax) {
  const std::size_t n = z.size();
  const double dn = static_cast<double>(n);
  InnerResult out;
  out.p.resize(n);

  if (div.name == "kl") {
    // exp((z_i - lambda)/alpha) averages to 1: log-sum-exp in closed form.
    double mean = 0;
    for (double zi : z) mean += std::exp((zi - zmax) / alpha);
    mean /= dn;
    out.lambda = zmax + alpha * std::log(mean);
    for (std::size_t i = 0; i < n; ++i) {
      out.p[i] = div.phi_prime_inv((z[i] - out.lambda) / alpha) / dn;
    }
    return out;
  }

  // General case: sum_i P_i(lambda) is nonincreasing in lambda. Below
  // zmin - alpha*phi'(N) every weight is at least 1/N * N; above zmax every
  // weight is at most 1/N, so the root is bracketed.
  double lambda_lo = zmin - alpha * div.phi_prime(dn);
  double lambda_hi = zmax;
  auto total = [&](double lambda) {
    double s = 0;
    for (double zi : z) s += div.phi_prime_inv((zi - lambda) / alpha);
    return s / dn;
  };
  while (total(lambda_lo) < 1.0) lambda_lo -= std::max(alpha, zmax - zmin) + 1.0;

  const long cap = bisection_cap(lambda_hi - lambda_lo, eps);
  for (long it = 0; it < cap && lambda_hi - lambda_lo > eps; ++it) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    if (total(mid) > 1.0) {
      lambda_lo = mid;
    } else {
      lambda_hi = mid;
    }
  }
  out.lambda = 0.5 * (lambda_lo + lambda_hi);
  for (std::size_t i = 0; i < n; ++i) {
    out.p[i] = div.phi_prime_inv((z[i] - out.lambda) / alpha) / dn;
  }
  return out;
}

double divergence_of(const Divergence& div, const std::vector<double>& p) {
  const double dn = static_cast<double>(p.size());
  double acc = 0;
  for (double pi : p) acc += div.phi(dn * pi);
  return acc / dn;
}

}  // namespace

RobustSolution maximize_robust_loss(const std::vector<double>& z, const RobustBall& ball) {
  const std::size_t n = z.size();
  if (n == 0) throw std::runtime_error("maximize_robust_loss: empty loss vector");
  if (!(ball.rho > 0)) throw std::runtime_error("maximize_robust_loss: rho must be positive");
  const double eps = ball.eps > 0 ? ball.eps : 1e-8;
  const Divergence& div = ball.div;
  const double dn = static_cast<double>(n);

  const double zmax = *std::max_element(z.begin(), z.end());
  const double zmin = *std::min_element(z.begin(), z.end());

  RobustSolution out;
  out.p.p.assign(n, 1.0 / dn);

  // Constant losses: every feasible P achieves the same value; report the
  // reference distribution with inactive duals.
  if (zmax - zmin <= kEqualTol * std::max(1.0, std::fabs(zmax))) {
    out.alpha = 0.0;
    out.lambda = zmax;
    out.value = zmax;
    out.case1 = true;
    return out;
  }

  // Case 1: all mass spread uniformly over the argmax set. Among maximizers
  // this has minimal divergence; accept when it is inside the ball.
  std::vector<std::size_t> argmax;
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] >= zmax - kArgmaxTol) argmax.push_back(i);
  }
  {
    std::vector<double> p1(n, 0.0);
    for (std::size_t i : argmax) p1[i] = 1.0 / static_cast<double>(argmax.size());
    if (divergence_of(div, p1) <= ball.rho + 1e-12) {
      out.p.p = std::move(p1);
      out.alpha = 0.0;
      out.lambda = zmax;
      out.value = zmax;
      out.case1 = true;
      return out;
    }
  }

  // Case 2: the ball constraint is active. Bisect the constraint dual alpha;
  // h(alpha) = D(P(alpha)) - rho is decreasing, positive at 0+, negative at
  // infinity.
  auto excess = [&](double alpha) {
    InnerResult inner = solve_lambda(z, div, alpha, eps, zmin, zmax);
    return divergence_of(div, inner.p) - ball.rho;
  };

  double alpha_lo = 1.0, alpha_hi = 1.0;
  if (excess(1.0) > 0) {
    for (int it = 0; it < 200 && excess(alpha_hi) > 0; ++it) alpha_hi *= 2.0;
  } else {
    for (int it = 0; it < 200 && excess(alpha_lo) <= 0; ++it) alpha_lo *= 0.5;
  }
  const long cap = bisection_cap(alpha_hi - alpha_lo, eps);
  for (long it = 0; it < cap && alpha_hi - alpha_lo > eps * std::max(1.0, alpha_hi); ++it) {
    const double mid = 0.5 * (alpha_lo + alpha_hi);
    if (excess(mid) > 0) {
      alpha_lo = mid;
    } else {
      alpha_hi = mid;
    }
  }
  const double alpha = 0.5 * (alpha_lo + alpha_hi);
  InnerResult inner = solve_lambda(z, div, alpha, eps, zmin, zmax);

  double total = 0;
  for (double pi : inner.p) total += pi;
  if (!(total > 0)) throw std::runtime_error("maximize_robust_loss: degenerate weights");
  for (double& pi : inner.p) pi /= total;

  out.p.p = std::move(inner.p);
  out.alpha = alpha;
  out.lambda = inner.lambda;
  out.case1 = false;
  out.value = 0;
  for (std::size_t i = 0; i < n; ++i) out.value += out.p.p[i] * z[i];
  out.p.validate();
  return out;
}

}  // namespace drrules
