#include "drrules/bounds.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drrules {

namespace {
void check_common(std::size_t n, int d, int c, const char* who) {
  if (n < 1) throw std::runtime_error(std::string(who) + ": need at least one sample");
  if (c < 2) throw std::runtime_error(std::string(who) + ": complexity budget must be >= 2");
  if (2 * d <= c - 1) {
    throw std::runtime_error(std::string(who) + ": need 2d > C-1 (too few features)");
  }
}
}  // namespace

double prop1_gap(std::size_t n, int d, int c, double delta) {
  check_common(n, d, c, "prop1_gap");
  if (!(delta > 0.0 && delta < 1.0)) throw std::runtime_error("prop1_gap: delta must be in (0,1)");
  const double cm1 = static_cast<double>(c - 1);
  const double inner = cm1 * std::log(2.0 * d / cm1) + std::log(1.0 / delta);
  return std::sqrt(2.0 / static_cast<double>(n) * inner);
}

SizeBounds size_bounds(int d, int c) {
  check_common(1, d, c, "size_bounds");
  const double cm1 = static_cast<double>(c - 1);
  SizeBounds out;
  out.lower = cm1 * std::log(2.0 * d / cm1);
  out.upper = cm1 * std::log(2.0 * d * std::exp(1.0) / cm1);
  return out;
}

Prop2Ingredients prop2_ingredients(std::size_t n, int d, int cprime, double margin, double delta) {
  check_common(n, d, cprime, "prop2_ingredients");
  if (!(margin > 0.0 && margin < 1.0)) {
    throw std::runtime_error("prop2_ingredients: margin must be in (0,1)");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::runtime_error("prop2_ingredients: delta must be in (0,1)");
  }
  Prop2Ingredients out;
  out.log_h = size_bounds(d, cprime).lower;
  if (!(static_cast<double>(n) > out.log_h)) {
    throw std::runtime_error("prop2_ingredients: need N > log|H| for the rate to be defined");
  }
  const double m_real =
      4.0 / (margin * margin) * std::log(static_cast<double>(n) / out.log_h);
  out.m = static_cast<long>(std::ceil(m_real));
  if (out.m < 1) out.m = 1;
  const double dm = static_cast<double>(out.m);
  out.delta_m = delta * (1.0 / dm - 1.0 / (dm + 1.0));
  out.lambda_m = std::sqrt(
      (std::log(dm + 1.0) + dm * out.log_h - std::log(out.delta_m)) /
      (2.0 * static_cast<double>(n)));
  return out;
}

}  // namespace drrules
