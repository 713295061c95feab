#include "drrules/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

#include "drrules/common.hpp"
#include "drrules/solver.hpp"

namespace drrules {

Collection::Collection(const BinaryDataset& data, RobustBall ball)
    : data_(&data), ball_(std::move(ball)) {
  fires_.assign(data.n, 0);
  pn_ = empirical_pmf(data.n);
}

double Collection::aggregate_value(std::size_t i) const {
  if (members_.empty()) return 0.0;
  return static_cast<double>(fires_[i]) / static_cast<double>(members_.size());
}

std::vector<double> Collection::margin_losses() const {
  const BinaryDataset& ds = *data_;
  const auto n_members = static_cast<std::int32_t>(members_.size());
  std::vector<double> z(ds.n, 0.0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    // Integer forms keep the prediction and the margin exact on the lattice.
    const int pred = members_.empty() ? 0 : (2 * fires_[i] >= n_members ? 1 : 0);
    if (pred == ds.y[i]) continue;
    z[i] = members_.empty()
               ? 0.5
               : std::fabs(static_cast<double>(2 * fires_[i] - n_members)) /
                     (2.0 * static_cast<double>(n_members));
  }
  return z;
}

void Collection::add_member(RuleSet h) {
  const BinaryDataset& ds = *data_;
  for (std::size_t i = 0; i < ds.n; ++i) {
    fires_[i] += h.eval(ds.row(i), ds.d) ? 1 : 0;
  }
  members_.push_back(std::move(h));
  const RobustSolution sol = maximize_robust_loss(margin_losses(), ball_);
  pn_ = sol.p;
  robust_value_ = sol.value;
}

double Collection::empirical_margin_loss() const {
  const std::vector<double> z = margin_losses();
  double s = 0;
  for (double zi : z) s += zi;
  return s / static_cast<double>(z.size());
}

ColgenResult grow_step(Collection& col, ColumnPool& pool, const ColgenConfig& cfg) {
  ColgenResult res = generate_ruleset(col.data(), col.worst_case(), pool, cfg);
  col.add_member(res.ruleset);
  return res;
}

double effective_delta(double configured, int c_budget, int cprime) {
  if (configured > 0) return configured;
  const int m = std::max(1, c_budget / std::max(1, cprime));
  return std::min(0.499, 1.0 / (2.0 * static_cast<double>(m)));
}

SelectResult select_sparse(const std::vector<RuleSet>& members, const BinaryDataset& data,
                           const Pmf& p, int c_budget, double delta, double time_limit_s,
                           long node_budget) {
  if (members.empty()) throw std::runtime_error("select_sparse: empty collection");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::runtime_error("select_sparse: delta must lie in (0, 1/2)");
  }
  if (p.p.size() != data.n) throw std::runtime_error("select_sparse: weight/data size mismatch");

  // Identical rule sets contribute identical columns; keep first occurrences.
  std::vector<const RuleSet*> distinct;
  {
    std::map<std::vector<std::vector<Literal>>, int> seen;
    for (const auto& h : members) {
      std::vector<std::vector<Literal>> key;
      for (const auto& c : h.rules()) key.push_back(c.literals());
      if (seen.emplace(std::move(key), 0).second) distinct.push_back(&h);
    }
  }
  const int K = static_cast<int>(distinct.size());

  int min_cost = distinct[0]->complexity();
  for (const auto* h : distinct) min_cost = std::min(min_cost, h->complexity());
  if (c_budget < min_cost) {
    throw std::runtime_error("select_sparse: complexity budget below the cheapest member");
  }

  // Member firing per point, then rows grouped by (pattern, label) with
  // summed weights: identical constraints with one shared slack.
  std::vector<std::vector<std::uint8_t>> fire(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    auto& fk = fire[static_cast<std::size_t>(k)];
    fk.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
      fk[i] = distinct[static_cast<std::size_t>(k)]->eval(data.row(i), data.d);
    }
  }
  struct Group {
    std::vector<std::uint8_t> pattern;
    int label;
    double weight;
  };
  std::vector<Group> groups;
  {
    std::map<std::pair<std::vector<std::uint8_t>, int>, int> index;
    std::vector<std::uint8_t> pat(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < data.n; ++i) {
      for (int k = 0; k < K; ++k) pat[static_cast<std::size_t>(k)] = fire[static_cast<std::size_t>(k)][i];
      auto [it, fresh] = index.emplace(std::make_pair(pat, static_cast<int>(data.y[i])),
                                       static_cast<int>(groups.size()));
      if (fresh) groups.push_back(Group{pat, static_cast<int>(data.y[i]), 0.0});
      groups[static_cast<std::size_t>(it->second)].weight += p.p[i];
    }
  }
  const int G = static_cast<int>(groups.size());

  // Variables: v_0..v_{K-1}, w_0..w_{K-1}, xi_0..xi_{G-1}.
  LpProblem lp;
  lp.maximize = false;
  for (int k = 0; k < K; ++k) lp.add_var(0.0, 0.0, 1.0);  // v_k
  for (int k = 0; k < K; ++k) lp.add_var(0.0, 0.0, 1.0);  // w_k
  for (int g = 0; g < G; ++g) {
    lp.add_var(groups[static_cast<std::size_t>(g)].weight, 0.0, kInf);  // xi_g
  }
  const auto v_of = [](int k) { return k; };
  const auto w_of = [&](int k) { return K + k; };
  const auto xi_of = [&](int g) { return 2 * K + g; };

  for (int g = 0; g < G; ++g) {
    const Group& gr = groups[static_cast<std::size_t>(g)];
    const int row = gr.label ? lp.add_row(RowSense::GE, 0.5 + delta)
                             : lp.add_row(RowSense::LE, 0.5 - delta);
    for (int k = 0; k < K; ++k) {
      if (gr.pattern[static_cast<std::size_t>(k)]) lp.add_entry(row, v_of(k), 1.0);
    }
    lp.add_entry(row, xi_of(g), gr.label ? 1.0 : -1.0);
  }
  const int convex_row = lp.add_row(RowSense::EQ, 1.0);
  for (int k = 0; k < K; ++k) lp.add_entry(convex_row, v_of(k), 1.0);
  for (int k = 0; k < K; ++k) {
    const int row = lp.add_row(RowSense::LE, 0.0);  // v_k <= w_k
    lp.add_entry(row, v_of(k), 1.0);
    lp.add_entry(row, w_of(k), -1.0);
  }
  const int budget_row = lp.add_row(RowSense::LE, static_cast<double>(c_budget));
  for (int k = 0; k < K; ++k) {
    lp.add_entry(budget_row, w_of(k), static_cast<double>(distinct[static_cast<std::size_t>(k)]->complexity()));
  }

  MipProblem mip;
  mip.lp = lp;
  for (int k = 0; k < K; ++k) mip.integer_vars.push_back(w_of(k));
  mip.time_limit_s = time_limit_s;
  mip.node_budget = node_budget;

  // Warm incumbent: the cheapest member alone (always feasible).
  {
    int kstar = 0;
    for (int k = 1; k < K; ++k) {
      if (distinct[static_cast<std::size_t>(k)]->complexity() <
          distinct[static_cast<std::size_t>(kstar)]->complexity()) {
        kstar = k;
      }
    }
    std::vector<double> x(static_cast<std::size_t>(lp.n_vars()), 0.0);
    x[static_cast<std::size_t>(v_of(kstar))] = 1.0;
    x[static_cast<std::size_t>(w_of(kstar))] = 1.0;
    for (int g = 0; g < G; ++g) {
      const Group& gr = groups[static_cast<std::size_t>(g)];
      const double f = gr.pattern[static_cast<std::size_t>(kstar)] ? 1.0 : 0.0;
      x[static_cast<std::size_t>(xi_of(g))] =
          gr.label ? std::max(0.0, 0.5 + delta - f) : std::max(0.0, f - (0.5 - delta));
    }
    mip.incumbent = std::move(x);
  }

  LpSolution sol = solve_mip(mip);
  if (sol.status != LpStatus::Optimal && sol.status != LpStatus::Limit) {
    throw std::runtime_error("select_sparse: selection IP failed unexpectedly");
  }

  std::vector<Ensemble::Member> weighted;
  for (int k = 0; k < K; ++k) {
    const double w = sol.x[static_cast<std::size_t>(w_of(k))];
    const double v = sol.x[static_cast<std::size_t>(v_of(k))];
    if (w > 0.5 && v > 1e-9) {
      weighted.push_back({*distinct[static_cast<std::size_t>(k)], v});
    }
  }

  SelectResult out;
  out.ensemble = Ensemble::make(weighted);
  out.objective = sol.objective;
  out.exact = sol.status == LpStatus::Optimal;
  out.nodes = sol.nodes;
  return out;
}

namespace {

std::vector<std::string> feature_names_of(const BinaryDataset& ds) {
  std::vector<std::string> names;
  names.reserve(ds.feature_meta.size());
  for (const auto& m : ds.feature_meta) names.push_back(m.display_name());
  return names;
}

TrainedModel constant_model(const BinaryDataset& ds, const TrainConfig& cfg, int label) {
  TrainedModel model;
  model.ensemble = Ensemble::make({{RuleSet{}, 1.0}});
  model.constant = label;
  model.config = cfg;
  model.dataset_fingerprint = ds.fingerprint();
  model.n_train = ds.n;
  model.n_features = ds.d;
  model.feature_names = feature_names_of(ds);
  return model;
}

}  // namespace

int TrainedModel::predict_row(const std::uint8_t* row, std::size_t d) const {
  if (constant.has_value()) return *constant;
  return ensemble.predict(row, d);
}

double TrainedModel::accuracy(const BinaryDataset& ds) const {
  if (ds.n == 0) throw std::runtime_error("accuracy: empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.n; ++i) {
    hits += predict_row(ds.row(i), ds.d) == ds.y[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.n);
}

TrainedModel train(const BinaryDataset& ds, const TrainConfig& cfg) {
  if (ds.n == 0) throw std::runtime_error("train: empty dataset");
  if (cfg.cprime < 2) throw std::runtime_error("train: cprime must be >= 2");
  if (cfg.cmax < cfg.cprime) throw std::runtime_error("train: cmax must be >= cprime");
  if (!(cfg.improve_thresh >= 0)) throw std::runtime_error("train: bad improvement threshold");
  if (cfg.patience < 1) throw std::runtime_error("train: patience must be >= 1");

  const auto n_pos = static_cast<std::size_t>(
      std::count(ds.y.begin(), ds.y.end(), std::uint8_t{1}));
  if (n_pos == 0 || n_pos == ds.n) {
    return constant_model(ds, cfg, n_pos == 0 ? 0 : 1);
  }

  RobustBall ball{Divergence::by_name(cfg.divergence), cfg.rho, 1e-8};
  Collection col(ds, ball);
  ColumnPool pool(ds);
  ColgenConfig colgen_cfg = cfg.colgen;
  colgen_cfg.cprime = cfg.cprime;
  const Pmf p0 = empirical_pmf(ds.n);

  // Budgets swept by the inner selection loop.
  std::vector<int> budgets;
  for (int m = 2; m * cfg.cprime <= cfg.cmax; ++m) budgets.push_back(m * cfg.cprime);
  if (budgets.empty()) budgets.push_back(cfg.cmax);

  TrainedModel model;
  model.config = cfg;
  model.dataset_fingerprint = ds.fingerprint();
  model.n_train = ds.n;
  model.n_features = ds.d;
  model.feature_names = feature_names_of(ds);

  double best_obj = kInf;
  int best_c = 0, best_iter = 0;
  bool have_best = false;
  int patience_used = 0;

  for (int iter = 1; iter <= cfg.max_outer_iters; ++iter) {
    const ColgenResult grown = grow_step(col, pool, colgen_cfg);
    const Pmf& p_ip = cfg.weights_for_ip == "pn" ? col.worst_case() : p0;

    double inner_best = kInf;
    int inner_c = 0;
    Ensemble inner_ens;
    for (int c_budget : budgets) {
      const SelectResult sel =
          select_sparse(col.members(), ds, p_ip, c_budget, effective_delta(cfg.delta, c_budget, cfg.cprime),
                        cfg.ensemble_ip_time_s, cfg.ensemble_ip_node_budget);
      const double improvement =
          inner_best == kInf ? kInf : (inner_best - sel.objective) / std::max(inner_best, 1e-9);
      if (sel.objective < inner_best - 1e-12) {
        inner_best = sel.objective;
        inner_c = c_budget;
        inner_ens = sel.ensemble;
      }
      if (improvement < cfg.improve_thresh) break;
    }

    // Outer progress is measured against the best objective ever seen.
    const double rel_gain =
        have_best ? (best_obj - inner_best) / std::max(best_obj, 1e-9) : kInf;
    const bool improved = rel_gain >= cfg.improve_thresh;

    const bool better = inner_best < best_obj - 1e-12 ||
                        (std::fabs(inner_best - best_obj) <= 1e-12 && have_best && inner_c < best_c);
    if (!have_best || better) {
      best_obj = inner_best;
      best_c = inner_c;
      best_iter = iter;
      model.ensemble = inner_ens;
      have_best = true;
    }

    OuterRecord rec;
    rec.iter = iter;
    rec.rmlp_objective = grown.lp_objective;
    rec.member_ip_objective = grown.ip_objective;
    rec.member_rules = static_cast<int>(col.members().back().rules().size());
    rec.robust_loss = col.robust_value();
    rec.empirical_loss = col.empirical_margin_loss();
    rec.inner_best_objective = inner_best;
    rec.inner_best_c = inner_c;
    rec.improved = improved;
    model.history.push_back(rec);

    if (cfg.trace) {
      *cfg.trace << "train iter=" << iter << " member_rules=" << rec.member_rules
                 << " robust=" << rec.robust_loss << " inner=" << inner_best
                 << " c=" << inner_c << " best=" << best_obj << " improved=" << improved
                 << "\n";
    }

    patience_used = improved ? 0 : patience_used + 1;
    if (patience_used >= cfg.patience) break;
  }

  model.train_objective = best_obj;
  model.chosen_c = best_c;
  model.chosen_iter = best_iter;
  return model;
}

std::vector<CyclingRecord> cycling_diagnostic(const BinaryDataset& ds, const RobustBall& ball,
                                              const ColgenConfig& cfg, int n_iters) {
  if (ds.n == 0) throw std::runtime_error("cycling_diagnostic: empty dataset");
  if (n_iters < 1) throw std::runtime_error("cycling_diagnostic: need at least one iteration");

  ColumnPool pool(ds);
  Pmf p = empirical_pmf(ds.n);
  std::vector<long> loss_sum(ds.n, 0);
  std::vector<CyclingRecord> out;

  for (int iter = 1; iter <= n_iters; ++iter) {
    const ColgenResult res = generate_ruleset(ds, p, pool, cfg);
    std::vector<double> z(ds.n, 0.0);
    CyclingRecord rec;
    rec.iter = iter;
    for (std::size_t i = 0; i < ds.n; ++i) {
      const int loss = res.ruleset.eval(ds.row(i), ds.d) == ds.y[i] ? 0 : 1;
      z[i] = loss;
      loss_sum[i] += loss;
      rec.inst[static_cast<std::size_t>(loss)] += 1;
      const double avg = static_cast<double>(loss_sum[i]) / static_cast<double>(iter);
      auto bin = static_cast<std::size_t>(std::lround(avg * 20.0));
      rec.average[std::min<std::size_t>(bin, 20)] += 1;
    }
    out.push_back(rec);
    p = maximize_robust_loss(z, ball).p;
  }
  return out;
}

}  // namespace drrules
