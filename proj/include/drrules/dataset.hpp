#pragma once
// Tabular ingestion and binarization.
//
// Pipeline: load_csv -> apply_special_values -> binarize -> split.
// Numeric columns become threshold-pair indicator columns (x<=t / x>t) at
// interior quantiles; categorical columns become presence/absence pairs per
// category; binary columns pass through with a negation column. Missing
// values set both columns of every pair to 0 and raise a per-source-column
// "is null" indicator (comparisons with null are false).

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drrules/common.hpp"

namespace drrules {

enum class ColumnKind { Numeric, Categorical, Binary, Label };

// Declarative description of how to read one CSV file.
struct Schema {
  std::string label_column;

  // When nonempty the file is headerless and these are the column names (a
  // first row exactly matching them is still recognized and skipped).
  std::vector<std::string> column_names;

  std::map<std::string, ColumnKind> kinds;  // per-column overrides
  ColumnKind default_kind = ColumnKind::Numeric;

  std::vector<std::string> missing_values;          // global missing sentinels
  std::vector<std::string> drop_columns;            // ignored entirely

  // Label mapping: either an explicit raw-value map to "0"/"1", or a numeric
  // threshold (value > threshold => 1). Unmapped labels are an error.
  std::map<std::string, std::string> label_map;
  std::optional<double> label_positive_threshold;

  // Per-column literal value rewrites applied before anything else
  // (e.g. clamping coded delinquency levels).
  std::map<std::string, std::map<std::string, std::string>> value_remap;

  int n_bins = 10;  // quantile bins for numeric columns (10 = deciles)

  // Parse a plain-text "key = value" schema file. Recognized keys:
  //   label, label_value.<raw>, label_positive_threshold, kind.<col>,
  //   default_kind, missing, drop, remap.<col>.<from>, bins,
  //   columns (comma list => headerless file),
  //   special.<sentinel> = drop-row-if-all | drop-row-if-match:<col,...> |
  //                        replace-with:<v> | replace-with-max-plus-1 | null-category
  // 'special.*' lines populate the policy returned alongside the schema.
  static std::pair<Schema, struct SpecialValuePolicy> from_file(const std::string& path);
};

// What to do with sentinel cell values (e.g. negative codes meaning
// "not observed"). Actions run in the order: row drops, then value rewrites,
// then null marking.
struct SpecialValuePolicy {
  enum class Action {
    DropRowIfAll,        // drop row when every feature cell equals the sentinel
    DropRowIfMatch,      // drop row when the sentinel appears in named columns
    ReplaceWith,         // replace sentinel with a fixed value
    ReplaceWithMaxPlus1, // replace sentinel with (column max of valid values) + 1
    NullCategory,        // treat sentinel as a missing value (null indicator)
  };
  struct Rule {
    std::string sentinel;
    Action action;
    std::string replacement;           // ReplaceWith only
    std::vector<std::string> columns;  // empty = all feature columns
  };
  std::vector<Rule> rules;
  bool empty() const { return rules.empty(); }
};

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
};

// Parsed CSV with labels resolved to {0,1}. Missing cells are stored as the
// empty string; all other cells keep their raw text.
struct RawTable {
  std::vector<RawColumn> columns;               // feature columns only
  std::vector<std::vector<std::string>> cells;  // row-major, parallel to columns
  std::vector<std::uint8_t> y;
  std::vector<std::string> warnings;

  std::size_t n_rows() const { return cells.size(); }
  std::size_t n_cols() const { return columns.size(); }
};

// Provenance of one binary feature column.
enum class BinOp { LessEq, Greater, EqCat, NeqCat, IsNull };

struct FeatureMeta {
  std::string source;   // source column name
  BinOp op;
  double threshold = 0;     // LessEq / Greater
  std::string category;     // EqCat / NeqCat
  std::string display_name() const;
};

struct BinaryDataset {
  std::size_t n = 0, d = 0;
  std::vector<std::uint8_t> x;  // row-major n*d over {0,1}
  std::vector<std::uint8_t> y;  // length n over {0,1}
  std::vector<FeatureMeta> feature_meta;
  std::vector<std::string> warnings;

  std::uint8_t at(std::size_t i, std::size_t j) const { return x[i * d + j]; }
  const std::uint8_t* row(std::size_t i) const { return x.data() + i * d; }
  // Stable content hash (shape + bits + labels) for provenance records.
  std::uint64_t fingerprint() const;
};

// Nonnegative weights over the n training points summing to 1.
struct Pmf {
  std::vector<double> p;

  std::size_t size() const { return p.size(); }
  double operator[](std::size_t i) const { return p[i]; }
  double sum() const;
  // Throws unless entries are nonnegative and sum to 1 within 1e-9.
  void validate() const;
};

// Uniform weights 1/n. Throws on n = 0.
Pmf empirical_pmf(std::size_t n);

// RFC-4180 CSV reader (UTF-8, quoted fields, header row unless the schema
// supplies column names). Throws std::runtime_error with row/column context
// on parse failures, unknown label values, or an empty table.
RawTable load_csv(const std::string& path, const Schema& schema);
RawTable load_csv_stream(std::istream& in, const Schema& schema, const std::string& origin);

// Apply sentinel handling. Unmatched sentinels are a no-op, not an error.
RawTable apply_special_values(RawTable table, const SpecialValuePolicy& policy);

// Binarize all feature columns. n_bins >= 1; numeric columns yield up to
// 2*(n_bins-1) columns (duplicate and non-separating thresholds collapsed),
// categorical columns 2 per category, binary columns 2. All-missing columns
// are dropped with a warning.
BinaryDataset binarize(const RawTable& table, int n_bins);

// Uniform random row partition into (train, test) with |train| clamped to
// [1, n-1] around floor(train_frac * n). Deterministic for a fixed seed.
std::pair<BinaryDataset, BinaryDataset> split(const BinaryDataset& ds, double train_frac,
                                              std::uint64_t seed);

// Write the binarized matrix as CSV (display-name header + 0/1 cells + label).
void export_csv(const BinaryDataset& ds, std::ostream& out);

}  // namespace drrules
