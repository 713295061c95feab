#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace drrules {

// Two-sided 95% Student-t quantile (0.975 point) with df degrees of freedom.
double t_quantile_975(int df);

struct Aggregate {
  double mean = 0.0;
  double ci_half = 0.0;  // 95% CI half-width, t-based; 0 for a single value
};

Aggregate mean_ci(const std::vector<double>& values);

struct SplitRecord {
  int index = 0;  // 0-based split number
  std::uint64_t seed = 0;
  double test_accuracy_pct = 0.0;
  double train_accuracy_pct = 0.0;
  int complexity = 0;
  int outer_iters = 0;
  double train_objective = 0.0;
  double wall_time_s = 0.0;  // reported in text only, never in JSON
};

struct BoundsReport {
  bool valid = false;
  double prop1_gap = 0.0;
  double size_lower = 0.0;
  double size_upper = 0.0;
  bool prop2_valid = false;
  long prop2_m = 0;
  double prop2_lambda = 0.0;
  std::string note;
};

struct ExperimentReport {
  std::string dataset;
  std::map<std::string, std::string> config;  // flag echo, key-sorted
  std::vector<SplitRecord> records;
  Aggregate accuracy;    // percent
  Aggregate complexity;  // ensemble complexity
  Aggregate iterations;  // outer iterations
  BoundsReport bounds;

  void recompute_aggregates();

  // Byte-stable JSON: excludes wall-clock fields so identical flags and seed
  // reproduce identical bytes. Self-checks aggregates before emitting.
  std::string to_json_string() const;
  // Aligned human-readable table; includes wall times.
  std::string to_text() const;
};

}  // namespace drrules
