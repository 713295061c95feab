// drrules: distributionally robust rule-ensemble classifiers from the
// command line. Subcommands:
//   train      fit one model on the full dataset, write model + history
//   experiment repeated random splits with an aggregate report (JSON + table)
//   eval       score a saved model on a dataset
//   cycling    0-1-loss reweighting diagnostic, histogram CSV
//   binarize   dump the binarized feature matrix as CSV
//   synth      emit the built-in synthetic planted-rule dataset

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "drrules/bounds.hpp"
#include "drrules/colgen.hpp"
#include "drrules/common.hpp"
#include "drrules/dataset.hpp"
#include "drrules/dro.hpp"
#include "drrules/ensemble.hpp"
#include "drrules/model_io.hpp"
#include "drrules/presets.hpp"
#include "drrules/report.hpp"
#include "drrules/synth.hpp"

namespace {

using namespace drrules;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared option bundles

struct DataOpts {
  std::string data_path;
  std::string preset;
  std::string schema_path;
  std::string label_col;
  int bins = 0;  // 0 = keep the schema's value
};

void add_data_opts(CLI::App* cmd, DataOpts& o) {
  cmd->add_option("--data", o.data_path, "input CSV file")->required();
  cmd->add_option("--preset", o.preset,
                  "named dataset config (heart, transfusion, fico, liver, synth)");
  cmd->add_option("--schema", o.schema_path, "schema/policy file (key = value lines)");
  cmd->add_option("--label-col", o.label_col, "label column (overrides preset/schema)");
  cmd->add_option("--bins", o.bins, "quantile bins for numeric columns (default 10)");
}

BinaryDataset load_binary(const DataOpts& o, std::string* dataset_name = nullptr) {
  Schema schema;
  SpecialValuePolicy policy;
  std::string name = "csv";
  if (!o.preset.empty()) {
    const Preset& p = preset_by_name(o.preset);
    schema = p.schema;
    policy = p.policy;
    name = p.name;
  }
  if (!o.schema_path.empty()) {
    auto pair = Schema::from_file(o.schema_path);
    schema = pair.first;
    policy = pair.second;
  }
  if (!o.label_col.empty()) schema.label_column = o.label_col;
  if (o.bins > 0) schema.n_bins = o.bins;
  if (schema.label_column.empty())
    throw std::runtime_error("no label column configured (use --preset, --schema, or --label-col)");

  RawTable table = load_csv(o.data_path, schema);
  table = apply_special_values(table, policy);
  BinaryDataset ds = binarize(table, schema.n_bins);
  for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  if (dataset_name) {
    if (o.preset.empty()) {
      // Derive a short name from the file path for report headers.
      std::size_t slash = o.data_path.find_last_of("/\\");
      name = slash == std::string::npos ? o.data_path : o.data_path.substr(slash + 1);
    }
    *dataset_name = name;
  }
  return ds;
}

struct TrainOpts {
  int cprime = 5;
  int cmax = 30;
  double rho = 0.05;
  std::string divergence = "chi2";
  double delta = 0.0;  // <= 0: derived from the budget
  int patience = 20;
  double improve_thresh = 0.005;
  std::string weights_for_ip = "p0";
  double pricing_time = 30.0;
  double colgen_time = 300.0;
  int colgen_iters = 5;
  double ip_time = 600.0;
  std::uint64_t seed = 1;
  bool verbose = false;
};

void add_train_opts(CLI::App* cmd, TrainOpts& o) {
  cmd->add_option("--cprime", o.cprime, "per-rule-set complexity budget C' (default 5)");
  cmd->add_option("--cmax", o.cmax, "ensemble complexity cap C (default 30)");
  cmd->add_option("--rho", o.rho, "divergence-ball radius (default 0.05)");
  cmd->add_option("--divergence", o.divergence, "ball divergence (default chi2)")
      ->check(CLI::IsMember({"chi2", "kl"}));
  cmd->add_option("--delta", o.delta, "selection margin around 1/2 (default: derived)");
  cmd->add_option("--patience", o.patience, "outer iterations without improvement (default 20)");
  cmd->add_option("--improve-thresh", o.improve_thresh,
                  "relative improvement counting as progress (default 0.005)");
  cmd->add_option("--weights-for-ip", o.weights_for_ip,
                  "point weights in the selection IP: empirical p0 or worst-case pn")
      ->check(CLI::IsMember({"p0", "pn"}));
  cmd->add_option("--pricing-time", o.pricing_time, "pricing search time limit, seconds");
  cmd->add_option("--colgen-time", o.colgen_time, "column-generation time budget, seconds");
  cmd->add_option("--colgen-iters", o.colgen_iters, "max column-generation rounds per member");
  cmd->add_option("--ip-time", o.ip_time, "selection-IP time limit, seconds");
  cmd->add_option("--seed", o.seed, "root random seed (default 1)");
  cmd->add_flag("--verbose", o.verbose, "trace solver progress to stderr");
}

TrainConfig make_train_config(const TrainOpts& o) {
  TrainConfig cfg;
  cfg.cprime = o.cprime;
  cfg.cmax = o.cmax;
  cfg.rho = o.rho;
  cfg.divergence = o.divergence;
  cfg.delta = o.delta;
  cfg.patience = o.patience;
  cfg.improve_thresh = o.improve_thresh;
  cfg.weights_for_ip = o.weights_for_ip;
  cfg.ensemble_ip_time_s = o.ip_time;
  cfg.colgen.cprime = o.cprime;
  cfg.colgen.pricing_time_s = o.pricing_time;
  cfg.colgen.total_time_s = o.colgen_time;
  cfg.colgen.max_rounds = o.colgen_iters;
  cfg.seed = o.seed;
  if (o.verbose) cfg.trace = &std::cerr;
  return cfg;
}

std::map<std::string, std::string> config_echo(const DataOpts& d, const TrainOpts& t) {
  std::map<std::string, std::string> m;
  m["data"] = d.data_path;
  if (!d.preset.empty()) m["preset"] = d.preset;
  if (!d.schema_path.empty()) m["schema"] = d.schema_path;
  if (!d.label_col.empty()) m["label_col"] = d.label_col;
  if (d.bins > 0) m["bins"] = std::to_string(d.bins);
  m["cprime"] = std::to_string(t.cprime);
  m["cmax"] = std::to_string(t.cmax);
  m["rho"] = fmt_double(t.rho);
  m["divergence"] = t.divergence;
  m["delta"] = t.delta > 0 ? fmt_double(t.delta) : std::string("auto");
  m["patience"] = std::to_string(t.patience);
  m["improve_thresh"] = fmt_double(t.improve_thresh);
  m["weights_for_ip"] = t.weights_for_ip;
  m["pricing_time"] = fmt_double(t.pricing_time);
  m["colgen_time"] = fmt_double(t.colgen_time);
  m["colgen_iters"] = std::to_string(t.colgen_iters);
  m["ip_time"] = fmt_double(t.ip_time);
  m["seed"] = std::to_string(t.seed);
  return m;
}

// ---------------------------------------------------------------------------
// train

int run_train(const DataOpts& dopt, const TrainOpts& topt, const std::string& out) {
  BinaryDataset ds = load_binary(dopt);
  TrainConfig cfg = make_train_config(topt);
  TrainedModel model = train(ds, cfg);

  std::string model_path = out.empty() ? "model.json" : out;
  std::string base = model_path;
  if (base.size() > 5 && base.compare(base.size() - 5, 5, ".json") == 0)
    base.resize(base.size() - 5);
  std::string history_path = base + ".history.csv";

  save_model(model, model_path);
  save_history_csv(model, history_path);

  std::cout << model_to_text(model);
  char line[160];
  std::snprintf(line, sizeof line,
                "# training accuracy %.2f%% | complexity %d | chosen C %d | %d outer iterations\n",
                100.0 * model.accuracy(ds), model.ensemble.complexity(), model.chosen_c,
                static_cast<int>(model.history.size()));
  std::cout << line;
  std::cout << "# model -> " << model_path << "\n# history -> " << history_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// experiment

BoundsReport make_bounds_report(std::size_t n_train, std::size_t d, const TrainOpts& t) {
  BoundsReport b;
  const double kDelta = 0.05;  // confidence level for the gap diagnostics
  try {
    b.prop1_gap = prop1_gap(n_train, static_cast<int>(d), t.cmax, kDelta);
    SizeBounds sb = size_bounds(static_cast<int>(d), t.cmax);
    b.size_lower = sb.lower;
    b.size_upper = sb.upper;
    b.valid = true;
  } catch (const std::exception& e) {
    b.note = e.what();
    return b;
  }
  try {
    double margin = effective_delta(t.delta, t.cmax, t.cprime);
    Prop2Ingredients ing =
        prop2_ingredients(n_train, static_cast<int>(d), t.cprime, margin, kDelta);
    b.prop2_valid = true;
    b.prop2_m = ing.m;
    b.prop2_lambda = ing.lambda_m;
  } catch (const std::exception& e) {
    b.note = e.what();
  }
  return b;
}

int run_experiment(const DataOpts& dopt, const TrainOpts& topt, int splits, double train_frac,
                   int jobs, const std::string& out) {
  if (splits < 1) throw std::runtime_error("--splits must be at least 1");
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw std::runtime_error("--train-frac must lie in (0, 1)");

  std::string dataset_name;
  BinaryDataset ds = load_binary(dopt, &dataset_name);
  TrainConfig base_cfg = make_train_config(topt);
  base_cfg.trace = nullptr;  // workers must not interleave trace output

  Rng root(topt.seed);
  std::vector<std::uint64_t> seeds(splits);
  for (int i = 0; i < splits; ++i) seeds[i] = root.fork(static_cast<std::uint64_t>(i)).next_u64();

  std::vector<SplitRecord> records(static_cast<std::size_t>(splits));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(splits));
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= splits) return;
      try {
        Timer timer;
        auto parts = split(ds, train_frac, seeds[i]);
        TrainConfig cfg = base_cfg;
        cfg.seed = seeds[i];
        TrainedModel model = train(parts.first, cfg);
        SplitRecord rec;
        rec.index = i;
        rec.seed = seeds[i];
        rec.test_accuracy_pct = 100.0 * model.accuracy(parts.second);
        rec.train_accuracy_pct = 100.0 * model.accuracy(parts.first);
        rec.complexity = model.ensemble.complexity();
        rec.outer_iters = static_cast<int>(model.history.size());
        rec.train_objective = model.train_objective;
        rec.wall_time_s = timer.seconds();
        records[i] = rec;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int n_workers = jobs > 0 ? jobs : hw;
  if (n_workers > splits) n_workers = splits;
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  for (int i = 0; i < splits; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  ExperimentReport report;
  report.dataset = dataset_name;
  report.config = config_echo(dopt, topt);
  report.config["splits"] = std::to_string(splits);
  report.config["train_frac"] = fmt_double(train_frac);
  report.records = records;
  report.recompute_aggregates();

  std::size_t n_train = std::min<std::size_t>(
      std::max<std::size_t>(static_cast<std::size_t>(train_frac * static_cast<double>(ds.n)), 1),
      ds.n - 1);
  report.bounds = make_bounds_report(n_train, ds.d, topt);

  std::cout << report.to_text();
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + out + "' for writing");
    f << report.to_json_string();
    if (!f) throw std::runtime_error("failed while writing '" + out + "'");
    std::cout << "report -> " << out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const DataOpts& dopt, const std::string& model_path) {
  TrainedModel model = load_model(model_path);
  BinaryDataset ds = load_binary(dopt);
  if (ds.d != model.n_features) {
    throw std::runtime_error("feature count mismatch: model expects " +
                             std::to_string(model.n_features) + " binary features, data has " +
                             std::to_string(ds.d));
  }

  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < ds.n; ++i) {
    int pred = model.predict_row(ds.row(i), ds.d);
    if (ds.y[i] == 1) {
      (pred == 1 ? tp : fn) += 1;
    } else {
      (pred == 1 ? fp : tn) += 1;
    }
  }
  double acc = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(ds.n);

  char line[160];
  std::snprintf(line, sizeof line, "accuracy %.2f%% on %zu rows\n", acc, ds.n);
  std::cout << line;
  std::snprintf(line, sizeof line, "confusion  tp=%ld fp=%ld tn=%ld fn=%ld\n", tp, fp, tn, fn);
  std::cout << line;
  if (model.constant.has_value()) {
    std::cout << "model is the constant " << *model.constant << " classifier\n";
    return 0;
  }
  std::cout << "per-rule firing rates:\n";
  int mi = 1;
  for (const Ensemble::Member& m : model.ensemble.members()) {
    int ri = 1;
    for (const Conjunction& rule : m.h.rules()) {
      long fires = 0;
      for (std::size_t i = 0; i < ds.n; ++i)
        if (rule.eval(ds.row(i), ds.d)) ++fires;
      std::snprintf(line, sizeof line, "  member %d rule %d: %6.2f%%  ", mi, ri,
                    100.0 * static_cast<double>(fires) / static_cast<double>(ds.n));
      std::cout << line << rule.describe(&ds.feature_meta) << "\n";
      ++ri;
    }
    ++mi;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// cycling

int run_cycling(const DataOpts& dopt, const TrainOpts& topt, int iters, const std::string& out) {
  if (iters < 1) throw std::runtime_error("--iters must be at least 1");
  BinaryDataset ds = load_binary(dopt);
  RobustBall ball{Divergence::by_name(topt.divergence), topt.rho};
  TrainConfig cfg = make_train_config(topt);

  std::vector<CyclingRecord> recs = cycling_diagnostic(ds, ball, cfg.colgen, iters);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + out + "' for writing");
    os = &file;
  }
  *os << "iteration,bin,instantaneous_count,running_average_count\n";
  char row[96];
  for (const CyclingRecord& r : recs) {
    for (int k = 0; k <= 20; ++k) {
      long inst = k == 0 ? r.inst[0] : (k == 20 ? r.inst[1] : 0);
      std::snprintf(row, sizeof row, "%d,%.2f,%ld,%ld\n", r.iter,
                    static_cast<double>(k) / 20.0, inst, r.average[static_cast<std::size_t>(k)]);
      *os << row;
    }
  }
  if (!*os) throw std::runtime_error("failed while writing the histogram CSV");
  if (!out.empty()) std::cerr << "histogram -> " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// binarize / synth

int run_binarize(const DataOpts& dopt, const std::string& out) {
  BinaryDataset ds = load_binary(dopt);
  if (out.empty()) {
    export_csv(ds, std::cout);
    return 0;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + out + "' for writing");
  export_csv(ds, f);
  if (!f) throw std::runtime_error("failed while writing '" + out + "'");
  std::cerr << "binarized matrix -> " << out << "\n";
  return 0;
}

int run_synth(const SynthSpec& spec, const std::string& out) {
  if (out.empty()) {
    write_synth_csv(std::cout, spec);
    return 0;
  }
  write_synth_csv_file(out, spec);
  std::cerr << "synthetic dataset -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributionally robust rule-ensemble classifiers"};
  app.require_subcommand(1);

  DataOpts dopt;
  TrainOpts topt;
  std::string out;
  std::string model_path;
  int splits = 20;
  double train_frac = 0.7;
  int jobs = 0;
  int iters = 50;
  SynthSpec synth_spec;

  CLI::App* cmd_train = app.add_subcommand("train", "fit a model on the full dataset");
  add_data_opts(cmd_train, dopt);
  add_train_opts(cmd_train, topt);
  cmd_train->add_option("--out", out, "model output path (default model.json)");

  CLI::App* cmd_experiment =
      app.add_subcommand("experiment", "repeated random splits with an aggregate report");
  add_data_opts(cmd_experiment, dopt);
  add_train_opts(cmd_experiment, topt);
  cmd_experiment->add_option("--splits", splits, "number of random splits (default 20)");
  cmd_experiment->add_option("--train-frac", train_frac, "training fraction (default 0.7)");
  cmd_experiment->add_option("--jobs", jobs, "worker threads (default: hardware parallelism)");
  cmd_experiment->add_option("--out", out, "JSON report path");

  CLI::App* cmd_eval = app.add_subcommand("eval", "score a saved model on a dataset");
  add_data_opts(cmd_eval, dopt);
  cmd_eval->add_option("--model", model_path, "model JSON file")->required();

  CLI::App* cmd_cycling =
      app.add_subcommand("cycling", "0-1-loss reweighting diagnostic (histogram CSV)");
  add_data_opts(cmd_cycling, dopt);
  add_train_opts(cmd_cycling, topt);
  cmd_cycling->add_option("--iters", iters, "diagnostic iterations (default 50)");
  cmd_cycling->add_option("--out", out, "CSV output path (default stdout)");

  CLI::App* cmd_binarize = app.add_subcommand("binarize", "dump the binarized matrix as CSV");
  add_data_opts(cmd_binarize, dopt);
  cmd_binarize->add_option("--out", out, "CSV output path (default stdout)");

  CLI::App* cmd_synth = app.add_subcommand("synth", "emit the synthetic planted-rule dataset");
  cmd_synth->add_option("--rows", synth_spec.rows, "rows to generate (default 400)");
  cmd_synth->add_option("--seed", synth_spec.seed, "generator seed (default 7)");
  cmd_synth->add_option("--noise", synth_spec.noise, "label flip probability (default 0.05)");
  cmd_synth->add_option("--out", out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    // Usage problems (missing --data, unknown flag, bad enum value, missing
    // subcommand) all exit 2; CLI11's own message goes to stderr.
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(cmd_train)) return run_train(dopt, topt, out);
    if (app.got_subcommand(cmd_experiment))
      return run_experiment(dopt, topt, splits, train_frac, jobs, out);
    if (app.got_subcommand(cmd_eval)) return run_eval(dopt, model_path);
    if (app.got_subcommand(cmd_cycling)) return run_cycling(dopt, topt, iters, out);
    if (app.got_subcommand(cmd_binarize)) return run_binarize(dopt, out);
    if (app.got_subcommand(cmd_synth)) return run_synth(synth_spec, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
