#include "drrules/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace drrules {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* c = s.c_str();
  char* end = nullptr;
  out = std::strtod(c, &end);
  return end != c && *end == '\0' && std::isfinite(out);
}

// Shortest clean rendering of a numeric value ("54", "0.5", not "54.000000").
std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Categories read as "3.0" and "3" should be the same category.
std::string canonical_category(const std::string& raw) {
  double v;
  if (parse_double(raw, v) && std::floor(v) == v && std::fabs(v) < 1e15) {
    return format_number(v);
  }
  return raw;
}

// One RFC-4180 record; returns false at end of input. Handles quoted fields,
// doubled quotes, and CRLF/LF endings. Unquoted fields are trimmed.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false, any = false, field_quoted = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_quoted = true;
        break;
      case ',':
        fields.push_back(field_quoted ? field : trim(field));
        field.clear();
        field_quoted = false;
        break;
      case '\r':
        break;
      case '\n': {
        ++line_no;
        fields.push_back(field_quoted ? field : trim(field));
        // Skip blank lines (common as trailing newlines).
        if (fields.size() == 1 && fields[0].empty()) {
          fields.clear();
          field.clear();
          field_quoted = false;
          any = false;
          continue;
        }
        return true;
      }
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw std::runtime_error("csv: unterminated quoted field at line " + std::to_string(line_no));
  if (!any && field.empty() && fields.empty()) return false;
  fields.push_back(field_quoted ? field : trim(field));
  if (fields.size() == 1 && fields[0].empty()) return false;
  return true;
}

bool iequals(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

}  // namespace

double Pmf::sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

void Pmf::validate() const {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] >= -1e-12)) {
      throw std::runtime_error("pmf: negative weight at index " + std::to_string(i));
    }
  }
  if (std::fabs(sum() - 1.0) > 1e-9) {
    throw std::runtime_error("pmf: weights sum to " + format_number(sum()) + ", expected 1");
  }
}

Pmf empirical_pmf(std::size_t n) {
  if (n == 0) throw std::runtime_error("empirical_pmf: n must be positive");
  Pmf w;
  w.p.assign(n, 1.0 / static_cast<double>(n));
  return w;
}

RawTable load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load_csv_stream(in, schema, path);
}

RawTable load_csv_stream(std::istream& in, const Schema& schema, const std::string& origin) {
  if (schema.label_column.empty()) {
    throw std::runtime_error(origin + ": schema does not name a label column");
  }
  std::size_t line_no = 1;
  std::vector<std::string> rec;

  // Resolve column names: from the header row, or from the schema for
  // headerless files (a first row that repeats the names is skipped).
  std::vector<std::string> names;
  bool pending_first_row = false;
  if (schema.column_names.empty()) {
    if (!read_record(in, rec, line_no)) throw std::runtime_error(origin + ": empty file");
    names = rec;
  } else {
    names = schema.column_names;
    if (!read_record(in, rec, line_no)) throw std::runtime_error(origin + ": empty file");
    bool is_header = rec.size() == names.size();
    if (is_header) {
      for (std::size_t i = 0; i < rec.size(); ++i) {
        if (!iequals(rec[i], names[i])) { is_header = false; break; }
      }
    }
    pending_first_row = !is_header;
  }

  int label_idx = -1;
  std::vector<int> keep;  // source index of each kept feature column
  RawTable t;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == schema.label_column) {
      if (label_idx >= 0) throw std::runtime_error(origin + ": duplicate label column");
      label_idx = static_cast<int>(i);
      continue;
    }
    if (std::find(schema.drop_columns.begin(), schema.drop_columns.end(), names[i]) !=
        schema.drop_columns.end())
      continue;
    RawColumn col;
    col.name = names[i];
    auto it = schema.kinds.find(names[i]);
    col.kind = it != schema.kinds.end() ? it->second : schema.default_kind;
    keep.push_back(static_cast<int>(i));
    t.columns.push_back(col);
  }
  if (label_idx < 0) {
    throw std::runtime_error(origin + ": label column '" + schema.label_column + "' not found");
  }

  auto is_missing = [&](const std::string& cell) {
    if (cell.empty()) return true;
    return std::find(schema.missing_values.begin(), schema.missing_values.end(), cell) !=
           schema.missing_values.end();
  };

  auto parse_label = [&](const std::string& raw, std::size_t row_1based) -> std::uint8_t {
    std::string cell = raw;
    if (!schema.label_map.empty()) {
      auto it = schema.label_map.find(cell);
      if (it == schema.label_map.end()) it = schema.label_map.find(canonical_category(cell));
      if (it == schema.label_map.end()) {
        throw std::runtime_error(origin + ": row " + std::to_string(row_1based) +
                                 ": unknown label value '" + cell + "'");
      }
      cell = it->second;
    } else if (schema.label_positive_threshold.has_value()) {
      double v;
      if (!parse_double(cell, v)) {
        throw std::runtime_error(origin + ": row " + std::to_string(row_1based) +
                                 ": non-numeric label value '" + cell + "'");
      }
      return v > *schema.label_positive_threshold ? 1 : 0;
    }
    if (cell == "0" || cell == "0.0") return 0;
    if (cell == "1" || cell == "1.0") return 1;
    throw std::runtime_error(origin + ": row " + std::to_string(row_1based) +
                             ": unknown label value '" + cell + "' (expected 0/1)");
  };

  std::size_t row_count = 0;
  auto consume_row = [&](const std::vector<std::string>& r) {
    ++row_count;
    if (r.size() != names.size()) {
      throw std::runtime_error(origin + ": row " + std::to_string(row_count) + " has " +
                               std::to_string(r.size()) + " fields, expected " +
                               std::to_string(names.size()));
    }
    std::vector<std::string> row(keep.size());
    for (std::size_t c = 0; c < keep.size(); ++c) {
      std::string cell = r[static_cast<std::size_t>(keep[c])];
      if (is_missing(cell)) {
        cell.clear();
      } else {
        auto rm = schema.value_remap.find(t.columns[c].name);
        if (rm != schema.value_remap.end()) {
          auto vr = rm->second.find(canonical_category(cell));
          if (vr == rm->second.end()) vr = rm->second.find(cell);
          if (vr != rm->second.end()) cell = vr->second;
        }
      }
      row[c] = std::move(cell);
    }
    t.y.push_back(parse_label(r[static_cast<std::size_t>(label_idx)], row_count));
    t.cells.push_back(std::move(row));
  };

  if (pending_first_row) consume_row(rec);
  while (read_record(in, rec, line_no)) consume_row(rec);

  if (t.cells.empty()) throw std::runtime_error(origin + ": empty table (no data rows)");
  return t;
}

RawTable apply_special_values(RawTable table, const SpecialValuePolicy& policy) {
  if (policy.empty()) return table;
  using Action = SpecialValuePolicy::Action;

  auto col_index = [&](const std::string& name) -> int {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (table.columns[c].name == name) return static_cast<int>(c);
    }
    return -1;
  };

  // Phase 1: row drops.
  std::vector<bool> drop(table.n_rows(), false);
  for (const auto& rule : policy.rules) {
    if (rule.action == Action::DropRowIfAll) {
      for (std::size_t i = 0; i < table.n_rows(); ++i) {
        bool all = !table.cells[i].empty();
        for (const auto& cell : table.cells[i]) {
          if (cell != rule.sentinel) { all = false; break; }
        }
        if (all) drop[i] = true;
      }
    } else if (rule.action == Action::DropRowIfMatch) {
      for (const auto& name : rule.columns) {
        int c = col_index(name);
        if (c < 0) continue;  // absent column: no-op by contract
        for (std::size_t i = 0; i < table.n_rows(); ++i) {
          if (table.cells[i][static_cast<std::size_t>(c)] == rule.sentinel) drop[i] = true;
        }
      }
    }
  }
  if (std::find(drop.begin(), drop.end(), true) != drop.end()) {
    RawTable kept;
    kept.columns = table.columns;
    kept.warnings = table.warnings;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < table.n_rows(); ++i) {
      if (drop[i]) { ++dropped; continue; }
      kept.cells.push_back(std::move(table.cells[i]));
      kept.y.push_back(table.y[i]);
    }
    kept.warnings.push_back("special values: dropped " + std::to_string(dropped) + " rows");
    table = std::move(kept);
  }

  auto sentinel_of_any_rule = [&](const std::string& cell) {
    for (const auto& r : policy.rules) {
      if (r.sentinel == cell) return true;
    }
    return false;
  };

  // Phase 2: replacements.
  for (const auto& rule : policy.rules) {
    if (rule.action != Action::ReplaceWith && rule.action != Action::ReplaceWithMaxPlus1) continue;
    std::vector<int> cols;
    if (rule.columns.empty()) {
      for (std::size_t c = 0; c < table.n_cols(); ++c) cols.push_back(static_cast<int>(c));
    } else {
      for (const auto& name : rule.columns) {
        int c = col_index(name);
        if (c >= 0) cols.push_back(c);
      }
    }
    for (int ci : cols) {
      auto c = static_cast<std::size_t>(ci);
      std::string replacement = rule.replacement;
      if (rule.action == Action::ReplaceWithMaxPlus1) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < table.n_rows(); ++i) {
          const std::string& cell = table.cells[i][c];
          double v;
          if (!cell.empty() && !sentinel_of_any_rule(cell) && parse_double(cell, v)) {
            best = std::max(best, v);
          }
        }
        if (!std::isfinite(best)) continue;  // nothing valid to anchor on
        replacement = format_number(best + 1);
      }
      bool used = false;
      for (std::size_t i = 0; i < table.n_rows(); ++i) {
        if (table.cells[i][c] == rule.sentinel) {
          table.cells[i][c] = replacement;
          used = true;
        }
      }
      if (used && rule.action == Action::ReplaceWithMaxPlus1) {
        table.warnings.push_back("special values: " + table.columns[c].name + ": '" +
                                 rule.sentinel + "' -> " + replacement);
      }
    }
  }

  // Phase 3: null marking.
  for (const auto& rule : policy.rules) {
    if (rule.action != Action::NullCategory) continue;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (!rule.columns.empty() &&
          std::find(rule.columns.begin(), rule.columns.end(), table.columns[c].name) ==
              rule.columns.end())
        continue;
      for (std::size_t i = 0; i < table.n_rows(); ++i) {
        if (table.cells[i][c] == rule.sentinel) table.cells[i][c].clear();
      }
    }
  }
  return table;
}

std::string FeatureMeta::display_name() const {
  switch (op) {
    case BinOp::LessEq: return source + "<=" + format_number(threshold);
    case BinOp::Greater: return source + ">" + format_number(threshold);
    case BinOp::EqCat: return source + "==" + category;
    case BinOp::NeqCat: return source + "!=" + category;
    case BinOp::IsNull: return source + "==null";
  }
  return source;
}

BinaryDataset binarize(const RawTable& table, int n_bins) {
  if (n_bins < 1) throw std::runtime_error("binarize: n_bins must be >= 1");
  const std::size_t n = table.n_rows();
  BinaryDataset ds;
  ds.n = n;
  ds.warnings = table.warnings;

  std::vector<std::vector<std::uint8_t>> cols;  // column-major build, packed below
  auto push_col = [&](FeatureMeta meta, std::vector<std::uint8_t> bits) {
    ds.feature_meta.push_back(std::move(meta));
    cols.push_back(std::move(bits));
  };

  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    const auto& col = table.columns[c];
    std::vector<std::uint8_t> is_null(n, 0);
    bool any_null = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (table.cells[i][c].empty()) {
        is_null[i] = 1;
        any_null = true;
      }
    }

    if (col.kind == ColumnKind::Numeric) {
      std::vector<double> parsed(n, 0.0);
      std::vector<double> values;
      for (std::size_t i = 0; i < n; ++i) {
        if (is_null[i]) continue;
        double v;
        if (!parse_double(table.cells[i][c], v)) {
          throw std::runtime_error("binarize: column '" + col.name + "' row " +
                                   std::to_string(i + 1) + ": non-numeric value '" +
                                   table.cells[i][c] + "'");
        }
        parsed[i] = v;
        values.push_back(v);
      }
      if (values.empty()) {
        ds.warnings.push_back("binarize: column '" + col.name + "' is all-missing, dropped");
        continue;
      }
      std::sort(values.begin(), values.end());
      const double vmax = values.back();
      // Interior quantiles by the nearest-rank method, duplicates collapsed.
      // A threshold equal to the column max separates nothing and is dropped,
      // so constant columns produce no thresholds.
      std::set<double> thresholds;
      const auto m = static_cast<long long>(values.size());
      for (int q = 1; q < n_bins; ++q) {
        long long rank = (static_cast<long long>(q) * m + n_bins - 1) / n_bins;  // ceil(q*m/bins)
        rank = std::max(1LL, rank);
        double t = values[static_cast<std::size_t>(rank - 1)];
        if (t < vmax) thresholds.insert(t);
      }
      for (double t : thresholds) {
        std::vector<std::uint8_t> le(n, 0), gt(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
          if (is_null[i]) continue;  // null: both sides false
          (parsed[i] <= t ? le : gt)[i] = 1;
        }
        push_col({col.name, BinOp::LessEq, t, ""}, std::move(le));
        push_col({col.name, BinOp::Greater, t, ""}, std::move(gt));
      }
    } else if (col.kind == ColumnKind::Categorical || col.kind == ColumnKind::Binary) {
      std::vector<std::string> canon(n);
      std::set<std::string> categories;
      for (std::size_t i = 0; i < n; ++i) {
        if (is_null[i]) continue;
        canon[i] = canonical_category(table.cells[i][c]);
        categories.insert(canon[i]);
      }
      if (categories.empty()) {
        ds.warnings.push_back("binarize: column '" + col.name + "' is all-missing, dropped");
        continue;
      }
      if (col.kind == ColumnKind::Binary) {
        for (const auto& cat : categories) {
          if (cat != "0" && cat != "1") {
            throw std::runtime_error("binarize: binary column '" + col.name +
                                     "' has value '" + cat + "'");
          }
        }
        categories = {"1"};  // passthrough + negation, not four columns
      }
      for (const auto& cat : categories) {
        std::vector<std::uint8_t> eq(n, 0), ne(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
          if (is_null[i]) continue;  // comparisons with null are false
          (canon[i] == cat ? eq : ne)[i] = 1;
        }
        push_col({col.name, BinOp::EqCat, 0, cat}, std::move(eq));
        push_col({col.name, BinOp::NeqCat, 0, cat}, std::move(ne));
      }
    } else {
      throw std::runtime_error("binarize: column '" + col.name + "' has label kind");
    }

    if (any_null) push_col({col.name, BinOp::IsNull, 0, ""}, std::move(is_null));
  }

  ds.d = cols.size();
  ds.y = table.y;
  ds.x.assign(n * ds.d, 0);
  for (std::size_t j = 0; j < ds.d; ++j) {
    for (std::size_t i = 0; i < n; ++i) ds.x[i * ds.d + j] = cols[j][i];
  }
  return ds;
}

std::uint64_t BinaryDataset::fingerprint() const {
  std::uint64_t h = fnv1a(&n, sizeof n);
  h = fnv1a(&d, sizeof d, h);
  if (!x.empty()) h = fnv1a(x.data(), x.size(), h);
  if (!y.empty()) h = fnv1a(y.data(), y.size(), h);
  return h;
}

std::pair<BinaryDataset, BinaryDataset> split(const BinaryDataset& ds, double train_frac,
                                              std::uint64_t seed) {
  if (ds.n < 2) throw std::runtime_error("split: need at least 2 rows");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw std::runtime_error("split: train_frac must be in (0,1)");
  }
  auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(ds.n)));
  n_train = std::min(std::max<std::size_t>(n_train, 1), ds.n - 1);

  std::vector<std::size_t> idx(ds.n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);

  std::vector<std::size_t> tr(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> te(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());

  auto take = [&](const std::vector<std::size_t>& rows) {
    BinaryDataset out;
    out.n = rows.size();
    out.d = ds.d;
    out.feature_meta = ds.feature_meta;
    out.x.resize(out.n * out.d);
    out.y.resize(out.n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      std::copy_n(ds.row(rows[r]), ds.d, out.x.begin() + static_cast<std::ptrdiff_t>(r * ds.d));
      out.y[r] = ds.y[rows[r]];
    }
    return out;
  };
  return {take(tr), take(te)};
}

void export_csv(const BinaryDataset& ds, std::ostream& out) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += "\"\"";
      else q.push_back(c);
    }
    return q + "\"";
  };
  for (std::size_t j = 0; j < ds.d; ++j) {
    out << quote(ds.feature_meta[j].display_name()) << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.d; ++j) out << int(ds.at(i, j)) << ',';
    out << int(ds.y[i]) << '\n';
  }
}

std::pair<Schema, SpecialValuePolicy> Schema::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  Schema s;
  SpecialValuePolicy policy;
  std::string line;
  std::size_t line_no = 0;

  auto parse_kind = [&](const std::string& v) {
    if (v == "numeric") return ColumnKind::Numeric;
    if (v == "categorical") return ColumnKind::Categorical;
    if (v == "binary") return ColumnKind::Binary;
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown kind '" + v + "'");
  };
  auto split_list = [](const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));

    if (key == "label") {
      s.label_column = value;
    } else if (key == "label_positive_threshold") {
      double v;
      if (!parse_double(value, v)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad threshold");
      }
      s.label_positive_threshold = v;
    } else if (key.rfind("label_value.", 0) == 0) {
      s.label_map[key.substr(12)] = value;
    } else if (key.rfind("kind.", 0) == 0) {
      s.kinds[key.substr(5)] = parse_kind(value);
    } else if (key == "default_kind") {
      s.default_kind = parse_kind(value);
    } else if (key == "missing") {
      s.missing_values = split_list(value);
    } else if (key == "drop") {
      s.drop_columns = split_list(value);
    } else if (key == "columns") {
      s.column_names = split_list(value);
    } else if (key == "bins") {
      s.n_bins = std::atoi(value.c_str());
      if (s.n_bins < 1) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bins must be >= 1");
      }
    } else if (key.rfind("remap.", 0) == 0) {
      std::string rest = key.substr(6);
      auto dot = rest.rfind('.');
      if (dot == std::string::npos) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected remap.<col>.<from>");
      }
      s.value_remap[rest.substr(0, dot)][rest.substr(dot + 1)] = value;
    } else if (key.rfind("special.", 0) == 0) {
      SpecialValuePolicy::Rule rule;
      rule.sentinel = key.substr(8);
      using Action = SpecialValuePolicy::Action;
      if (value == "drop-row-if-all") {
        rule.action = Action::DropRowIfAll;
      } else if (value.rfind("drop-row-if-match:", 0) == 0) {
        rule.action = Action::DropRowIfMatch;
        rule.columns = split_list(value.substr(18));
      } else if (value.rfind("replace-with:", 0) == 0) {
        rule.action = Action::ReplaceWith;
        rule.replacement = value.substr(13);
      } else if (value == "replace-with-max-plus-1") {
        rule.action = Action::ReplaceWithMaxPlus1;
      } else if (value == "null-category") {
        rule.action = Action::NullCategory;
      } else {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unknown special-value action '" + value + "'");
      }
      policy.rules.push_back(std::move(rule));
    } else {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return {std::move(s), std::move(policy)};
}

}  // namespace drrules
