#include "drrules/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace drrules {

double t_quantile_975(int df) {
  // Two-sided 95% critical values; dense through 30, then common anchors.
  static constexpr double kTable[30] = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
      2.262157,  2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
      2.109816,  2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
      2.059539,  2.055529, 2.051831, 2.048407, 2.045230, 2.042272};
  if (df < 1) throw std::runtime_error("t_quantile_975: need at least 1 degree of freedom");
  if (df <= 30) return kTable[df - 1];
  if (df <= 40) return 2.021075;
  if (df <= 50) return 2.008559;
  if (df <= 60) return 2.000298;
  if (df <= 80) return 1.990063;
  if (df <= 100) return 1.983972;
  if (df <= 120) return 1.979930;
  return 1.959964;
}

Aggregate mean_ci(const std::vector<double>& values) {
  if (values.empty()) throw std::runtime_error("mean_ci: no values");
  Aggregate a;
  for (double v : values) a.mean += v;
  a.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return a;
  double ss = 0;
  for (double v : values) ss += (v - a.mean) * (v - a.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  a.ci_half = t_quantile_975(static_cast<int>(values.size()) - 1) * sd /
              std::sqrt(static_cast<double>(values.size()));
  return a;
}

namespace {

std::string hex_u64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void verify_aggregates(const ExperimentReport& r) {
  ExperimentReport fresh = r;
  fresh.recompute_aggregates();
  const auto close = [](const Aggregate& a, const Aggregate& b) {
    return std::fabs(a.mean - b.mean) <= 1e-9 && std::fabs(a.ci_half - b.ci_half) <= 1e-9;
  };
  if (!close(fresh.accuracy, r.accuracy) || !close(fresh.complexity, r.complexity) ||
      !close(fresh.iterations, r.iterations)) {
    throw std::runtime_error("report: aggregates inconsistent with per-split records");
  }
  for (const auto& rec : r.records) {
    if (rec.test_accuracy_pct < 0.0 || rec.test_accuracy_pct > 100.0) {
      throw std::runtime_error("report: accuracy outside [0,100]");
    }
  }
}

}  // namespace

void ExperimentReport::recompute_aggregates() {
  std::vector<double> acc, comp, iters;
  for (const auto& r : records) {
    acc.push_back(r.test_accuracy_pct);
    comp.push_back(static_cast<double>(r.complexity));
    iters.push_back(static_cast<double>(r.outer_iters));
  }
  accuracy = mean_ci(acc);
  complexity = mean_ci(comp);
  iterations = mean_ci(iters);
}

std::string ExperimentReport::to_json_string() const {
  verify_aggregates(*this);
  nlohmann::json j;
  j["dataset"] = dataset;
  j["config"] = config;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"index", r.index},
                    {"seed", hex_u64(r.seed)},
                    {"test_accuracy_pct", r.test_accuracy_pct},
                    {"train_accuracy_pct", r.train_accuracy_pct},
                    {"complexity", r.complexity},
                    {"outer_iters", r.outer_iters},
                    {"train_objective", r.train_objective}});
  }
  j["splits"] = std::move(recs);
  j["aggregates"] = {
      {"accuracy", {{"mean", accuracy.mean}, {"ci95_half", accuracy.ci_half}}},
      {"complexity", {{"mean", complexity.mean}, {"ci95_half", complexity.ci_half}}},
      {"outer_iters", {{"mean", iterations.mean}, {"ci95_half", iterations.ci_half}}},
  };
  if (bounds.valid) {
    nlohmann::json b;
    b["prop1_gap"] = bounds.prop1_gap;
    b["size_log_lower"] = bounds.size_lower;
    b["size_log_upper"] = bounds.size_upper;
    if (bounds.prop2_valid) {
      b["prop2_m"] = bounds.prop2_m;
      b["prop2_lambda"] = bounds.prop2_lambda;
    }
    if (!bounds.note.empty()) b["note"] = bounds.note;
    j["bounds"] = std::move(b);
  }
  return j.dump(2) + "\n";
}

std::string ExperimentReport::to_text() const {
  verify_aggregates(*this);
  std::ostringstream out;
  char line[256];
  out << "dataset: " << dataset << "  (" << records.size() << " splits)\n";
  out << "split  seed              test_acc%  train_acc%  complexity  iters  objective    time_s\n";
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%-5d  %s  %9.2f  %10.2f  %10d  %5d  %9.6f  %8.2f\n",
                  r.index, hex_u64(r.seed).c_str(), r.test_accuracy_pct, r.train_accuracy_pct,
                  r.complexity, r.outer_iters, r.train_objective, r.wall_time_s);
    out << line;
  }
  std::snprintf(line, sizeof line,
                "mean   accuracy %.1f (%.1f)   complexity %.1f (%.1f)   iterations %.1f (%.1f)\n",
                accuracy.mean, accuracy.ci_half, complexity.mean, complexity.ci_half,
                iterations.mean, iterations.ci_half);
  out << line;
  if (bounds.valid) {
    std::snprintf(line, sizeof line, "gap bound %.4f   log-size bounds [%.4f, %.4f]\n",
                  bounds.prop1_gap, bounds.size_lower, bounds.size_upper);
    out << line;
    if (bounds.prop2_valid) {
      std::snprintf(line, sizeof line, "rate ingredients: M=%ld lambda_M=%.4f\n", bounds.prop2_m,
                    bounds.prop2_lambda);
      out << line;
    }
    if (!bounds.note.empty()) out << "note: " << bounds.note << "\n";
  }
  return out.str();
}

}  // namespace drrules
