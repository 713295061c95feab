#include "drrules/colgen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "drrules/common.hpp"

namespace drrules {

ColumnPool::ColumnPool(const BinaryDataset& data) : data_(&data) {}

int ColumnPool::add(const Conjunction& c) {
  if (!keys_.insert(c.literals()).second) return -1;
  Entry e;
  e.conj = c;
  e.cost = c.complexity();
  const BinaryDataset& ds = *data_;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(ds.n); ++i) {
    if (!c.eval(ds.row(i), ds.d)) continue;
    (ds.y[static_cast<std::size_t>(i)] ? e.cover_pos : e.cover_neg).push_back(i);
  }
  entries_.push_back(std::move(e));
  return size() - 1;
}

bool ColumnPool::contains(const Conjunction& c) const { return keys_.count(c.literals()) > 0; }

LpProblem build_master(const ColumnPool& pool, const Pmf& p, int cprime) {
  const BinaryDataset& ds = pool.data();
  if (pool.size() == 0) throw std::runtime_error("build_master: empty column pool");
  if (p.p.size() != ds.n) throw std::runtime_error("build_master: weight/data size mismatch");

  std::vector<std::int32_t> row_of(ds.n, -1);
  LpProblem lp;
  lp.maximize = false;
  int n_pos = 0;
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (ds.y[i]) row_of[i] = n_pos++;
  }
  if (n_pos == 0) throw std::runtime_error("build_master: no label-1 points");

  // Coverage rows first, complexity row last (index n_pos).
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (ds.y[i]) lp.add_row(RowSense::GE, p.p[i]);
  }
  const int complexity_row = lp.add_row(RowSense::LE, static_cast<double>(cprime));

  // xi_i >= 0, one per label-1 point, unit objective and unit row entry.
  for (std::size_t i = 0; i < ds.n; ++i) {
    if (!ds.y[i]) continue;
    const int v = lp.add_var(1.0, 0.0, kInf);
    lp.add_entry(row_of[i], v, 1.0);
  }
  // w_k in [0,1]: false-positive mass in the objective, P_i on covered rows.
  for (const auto& e : pool.entries()) {
    double fp = 0;
    for (std::int32_t i : e.cover_neg) fp += p.p[static_cast<std::size_t>(i)];
    const int v = lp.add_var(fp, 0.0, 1.0);
    for (std::int32_t i : e.cover_pos) {
      lp.add_entry(row_of[static_cast<std::size_t>(i)], v, p.p[static_cast<std::size_t>(i)]);
    }
    lp.add_entry(complexity_row, v, static_cast<double>(e.cost));
  }
  return lp;
}

double reduced_cost(const ColumnPool::Entry& entry, const std::vector<double>& mu_by_point,
                    double lambda, const Pmf& p) {
  if (mu_by_point.size() != p.p.size()) throw std::runtime_error("reduced_cost: missing duals");
  double rc = lambda * entry.cost;
  for (std::int32_t i : entry.cover_neg) rc += p.p[static_cast<std::size_t>(i)];
  for (std::int32_t i : entry.cover_pos) {
    rc -= p.p[static_cast<std::size_t>(i)] * mu_by_point[static_cast<std::size_t>(i)];
  }
  return rc;
}

namespace {

// Shared state of one pricing search.
struct PricingSearch {
  const BinaryDataset& ds;
  std::vector<double> gain;  // per point: P_i mu_i for y=1, 0 otherwise
  std::vector<double> fp;    // per point: P_i for y=0, 0 otherwise
  double lambda;
  int literal_cap;
  int keep_limit;
  long node_budget;
  double time_limit_s;
  Timer timer;

  struct Kept {
    double obj;
    std::vector<Literal> lits;  // sorted by feature
  };
  std::vector<Kept> kept;  // ascending by obj
  std::set<std::vector<Literal>> kept_keys;
  double best_value = kInf;
  long nodes = 0;
  bool exact = true;

  std::vector<int> feature_order;           // features, most promising first
  std::vector<std::array<double, 2>> gsum;  // per feature: gain mass at value 0/1

  PricingSearch(const BinaryDataset& data, const Pmf& p, const std::vector<double>& mu,
                double lam, const ColgenConfig& cfg)
      : ds(data), lambda(lam), literal_cap(cfg.literal_cap()),
        keep_limit(cfg.columns_per_round), node_budget(cfg.pricing_node_budget),
        time_limit_s(cfg.pricing_time_s) {
    gain.assign(ds.n, 0.0);
    fp.assign(ds.n, 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
      if (ds.y[i]) {
        gain[i] = p.p[i] * mu[i];
      } else {
        fp[i] = p.p[i];
      }
    }
    // Branch on features carrying the most dual-weighted coverage first.
    gsum.assign(ds.d, {0.0, 0.0});
    for (std::size_t i = 0; i < ds.n; ++i) {
      if (gain[i] == 0.0) continue;
      for (std::size_t j = 0; j < ds.d; ++j) gsum[j][ds.at(i, j)] += gain[i];
    }
    feature_order.resize(ds.d);
    for (std::size_t j = 0; j < ds.d; ++j) feature_order[j] = static_cast<int>(j);
    std::stable_sort(feature_order.begin(), feature_order.end(), [&](int a, int b) {
      const auto au = static_cast<std::size_t>(a), bu = static_cast<std::size_t>(b);
      return std::max(gsum[au][0], gsum[au][1]) > std::max(gsum[bu][0], gsum[bu][1]);
    });
  }

  double objective(int n_literals, double g, double f) const {
    return lambda * (1.0 + n_literals) - g + f;
  }

  // Everything below this value is worth exploring further.
  double cutoff() const {
    if (static_cast<int>(kept.size()) < keep_limit) return -tol::reduced_cost;
    return kept.back().obj;
  }

  void offer(double obj, std::vector<Literal> lits) {
    best_value = std::min(best_value, obj);
    if (obj >= -tol::reduced_cost) return;
    std::sort(lits.begin(), lits.end());
    if (static_cast<int>(kept.size()) >= keep_limit && obj >= kept.back().obj) return;
    if (!kept_keys.insert(lits).second) return;
    const auto at = std::upper_bound(kept.begin(), kept.end(), obj,
                                     [](double o, const Kept& k) { return o < k.obj; });
    kept.insert(at, Kept{obj, std::move(lits)});
    if (static_cast<int>(kept.size()) > keep_limit) {
      kept_keys.erase(kept.back().lits);
      kept.pop_back();
    }
  }

  bool budget_ok() {
    if (nodes >= node_budget) {
      exact = false;
      return false;
    }
    if ((nodes & 4095) == 0 && timer.seconds() > time_limit_s) {
      exact = false;
      return false;
    }
    return true;
  }

  // Depth-first over literal sets along feature_order positions; each
  // conjunction is enumerated at most once. `order_pos` is the next position
  // eligible for extension. Descendant bound: every proper extension keeps
  // at most the current covered gain, pays lambda for one more literal, and
  // its false-positive mass is nonnegative.
  void dfs(std::size_t order_pos, const std::vector<std::int32_t>& coverage,
           std::vector<Literal>& lits) {
    if (static_cast<int>(lits.size()) >= literal_cap) return;
    for (std::size_t pos = order_pos; pos < feature_order.size(); ++pos) {
      const int feat = feature_order[pos];
      // Try the value with more dual-weighted coverage first.
      const auto fu = static_cast<std::size_t>(feat);
      std::array<std::uint8_t, 2> vals =
          gsum[fu][1] >= gsum[fu][0] ? std::array<std::uint8_t, 2>{1, 0}
                                     : std::array<std::uint8_t, 2>{0, 1};
      for (std::uint8_t v : vals) {
        if (!budget_ok()) return;
        ++nodes;
        std::vector<std::int32_t> child;
        child.reserve(coverage.size());
        double cg = 0, cf = 0;
        for (std::int32_t i : coverage) {
          const auto iu = static_cast<std::size_t>(i);
          if (ds.at(iu, fu) != v) continue;
          child.push_back(i);
          cg += gain[iu];
          cf += fp[iu];
        }
        lits.push_back(Literal{feat, v});
        offer(objective(static_cast<int>(lits.size()), cg, cf), lits);
        const double bound = lambda * (2.0 + static_cast<double>(lits.size())) - cg;
        if (bound < cutoff()) dfs(pos + 1, child, lits);
        lits.pop_back();
        if (!exact) return;
      }
    }
  }

  // Greedy warm start: repeatedly append the single literal giving the lowest
  // objective; every prefix is offered as an incumbent.
  void greedy() {
    std::vector<std::int32_t> coverage(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) coverage[i] = static_cast<std::int32_t>(i);
    std::vector<Literal> lits;
    std::vector<std::uint8_t> used(ds.d, 0);
    double cur_obj = kInf;
    while (static_cast<int>(lits.size()) < literal_cap) {
      int best_feat = -1;
      std::uint8_t best_val = 0;
      double best_obj = cur_obj;
      for (int feat : feature_order) {
        const auto fu = static_cast<std::size_t>(feat);
        if (used[fu]) continue;
        for (std::uint8_t v : {std::uint8_t{1}, std::uint8_t{0}}) {
          double g = 0, f = 0;
          for (std::int32_t i : coverage) {
            const auto iu = static_cast<std::size_t>(i);
            if (ds.at(iu, fu) != v) continue;
            g += gain[iu];
            f += fp[iu];
          }
          const double obj = objective(static_cast<int>(lits.size()) + 1, g, f);
          if (obj < best_obj - 1e-15) {
            best_obj = obj;
            best_feat = feat;
            best_val = v;
          }
        }
      }
      if (best_feat < 0) break;
      const auto fu = static_cast<std::size_t>(best_feat);
      std::vector<std::int32_t> next;
      for (std::int32_t i : coverage) {
        if (ds.at(static_cast<std::size_t>(i), fu) == best_val) next.push_back(i);
      }
      coverage = std::move(next);
      lits.push_back(Literal{best_feat, best_val});
      used[fu] = 1;
      cur_obj = best_obj;
      offer(cur_obj, lits);
    }
  }
};

}  // namespace

PricingOutcome solve_pricing(const BinaryDataset& data, const Pmf& p,
                             const std::vector<double>& mu_by_point, double lambda,
                             const ColgenConfig& cfg) {
  if (mu_by_point.size() != data.n) throw std::runtime_error("solve_pricing: missing duals");
  if (lambda < 0) throw std::runtime_error("solve_pricing: lambda must be nonnegative");
  PricingSearch search(data, p, mu_by_point, lambda, cfg);
  search.greedy();

  std::vector<std::int32_t> all(data.n);
  double g0 = 0;
  for (std::size_t i = 0; i < data.n; ++i) {
    all[i] = static_cast<std::int32_t>(i);
    g0 += search.gain[i];
  }
  // Root bound covers every 1+ literal conjunction.
  if (lambda * 2.0 - g0 < search.cutoff()) {
    std::vector<Literal> lits;
    search.dfs(0, all, lits);
  }

  PricingOutcome out;
  out.exact = search.exact;
  out.nodes = search.nodes;
  out.best_value = search.best_value == kInf ? 0.0 : search.best_value;
  for (const auto& k : search.kept) out.columns.push_back(Conjunction::make(k.lits));
  return out;
}

namespace {

// Single-literal rules with weighted precision above 1/2 keep the restricted
// master nonempty and give pricing a sensible dual start; when nothing
// clears the bar the single best literal is used instead.
void seed_pool(ColumnPool& pool, const BinaryDataset& ds, const Pmf& p) {
  double best_precision = -1.0;
  Conjunction best;
  for (std::size_t j = 0; j < ds.d; ++j) {
    for (std::uint8_t v : {std::uint8_t{0}, std::uint8_t{1}}) {
      double wpos = 0, wneg = 0;
      for (std::size_t i = 0; i < ds.n; ++i) {
        if (ds.at(i, j) != v) continue;
        (ds.y[i] ? wpos : wneg) += p.p[i];
      }
      const double covered = wpos + wneg;
      const double precision = covered > 0 ? wpos / covered : 0.0;
      const Conjunction c = Conjunction::make({Literal{static_cast<int>(j), v}});
      if (precision > 0.5) pool.add(c);
      if (precision > best_precision) {
        best_precision = precision;
        best = c;
      }
    }
  }
  if (pool.size() == 0 && ds.d > 0) pool.add(best);
}

}  // namespace

ColgenResult generate_ruleset(const BinaryDataset& data, const Pmf& p, ColumnPool& pool,
                              const ColgenConfig& cfg) {
  if (&pool.data() != &data) throw std::runtime_error("generate_ruleset: pool/data mismatch");
  if (cfg.cprime < 2) throw std::runtime_error("generate_ruleset: cprime must be >= 2");
  Timer timer;
  ColgenResult out;

  const bool any_pos = std::any_of(data.y.begin(), data.y.end(), [](std::uint8_t y) { return y; });
  if (!any_pos) {
    // Nothing to cover: the empty rule set is exactly optimal.
    out.lp_converged = true;
    out.ip_exact = true;
    return out;
  }

  seed_pool(pool, data, p);

  SimplexSolver solver(build_master(pool, p, cfg.cprime));
  const int n_pos = static_cast<int>(std::count(data.y.begin(), data.y.end(), std::uint8_t{1}));
  std::vector<std::int32_t> pos_rows;
  for (std::size_t i = 0; i < data.n; ++i) {
    if (data.y[i]) pos_rows.push_back(static_cast<std::int32_t>(i));
  }

  int pool_at_build = pool.size();  // columns present in the solver
  LpSolution lp;
  for (out.rounds = 1; out.rounds <= cfg.max_rounds; ++out.rounds) {
    lp = out.rounds == 1 ? solver.solve() : solver.resolve();
    if (lp.status != LpStatus::Optimal) break;
    out.lp_objective = lp.objective;

    std::vector<double> mu(data.n, 0.0);
    for (int r = 0; r < n_pos; ++r) {
      mu[static_cast<std::size_t>(pos_rows[static_cast<std::size_t>(r)])] =
          std::max(0.0, lp.duals[static_cast<std::size_t>(r)]);
    }
    const double lambda = std::max(0.0, -lp.duals[static_cast<std::size_t>(n_pos)]);

    ColgenConfig pricing_cfg = cfg;
    pricing_cfg.pricing_time_s =
        std::min(cfg.pricing_time_s, std::max(0.0, cfg.total_time_s - timer.seconds()));
    PricingOutcome priced = solve_pricing(data, p, mu, lambda, pricing_cfg);
    out.pricing_nodes += priced.nodes;
    out.pricing_bound = priced.best_value;

    int added = 0;
    for (const auto& conj : priced.columns) {
      const int idx = pool.add(conj);
      if (idx < 0) continue;
      const auto& e = pool.entries()[static_cast<std::size_t>(idx)];
      double fp_mass = 0;
      std::vector<std::pair<int, double>> entries;
      for (std::int32_t i : e.cover_neg) fp_mass += p.p[static_cast<std::size_t>(i)];
      for (std::int32_t i : e.cover_pos) {
        const auto iu = static_cast<std::size_t>(i);
        const int row = static_cast<int>(std::lower_bound(pos_rows.begin(), pos_rows.end(), i) -
                                         pos_rows.begin());
        entries.emplace_back(row, p.p[iu]);
      }
      entries.emplace_back(n_pos, static_cast<double>(e.cost));
      solver.add_column(fp_mass, entries, 0.0, 1.0);
      ++added;
    }
    pool_at_build = pool.size();

    if (cfg.trace) {
      *cfg.trace << "colgen round=" << out.rounds << " rmlp=" << lp.objective
                 << " lambda=" << lambda << " added=" << added << " bound=" << priced.best_value
                 << " exact=" << (priced.exact ? 1 : 0) << " nodes=" << priced.nodes
                 << " t=" << timer.seconds() << "\n";
    }

    if (priced.exact && priced.best_value >= -tol::reduced_cost) {
      out.lp_converged = true;
      break;
    }
    if (added == 0) break;  // only duplicates came back: no progress possible
    if (timer.seconds() > cfg.total_time_s) break;
  }

  // Fix the selection over the generated pool with the master IP.
  MipProblem mip;
  mip.lp = solver.problem();
  for (int k = 0; k < pool_at_build; ++k) mip.integer_vars.push_back(n_pos + k);
  mip.time_limit_s = std::max(cfg.ip_floor_s, cfg.total_time_s - timer.seconds());
  mip.node_budget = cfg.ip_node_budget;
  std::vector<double> start(static_cast<std::size_t>(mip.lp.n_vars()), 0.0);
  for (int r = 0; r < n_pos; ++r) {
    start[static_cast<std::size_t>(r)] =
        p.p[static_cast<std::size_t>(pos_rows[static_cast<std::size_t>(r)])];
  }
  mip.incumbent = std::move(start);

  LpSolution ip = solve_mip(mip);
  out.ip_nodes = ip.nodes;
  if (ip.status != LpStatus::Optimal && ip.status != LpStatus::Limit) {
    out.flagged_infeasible = true;  // cannot happen: the all-zero w is feasible
    return out;
  }
  out.ip_exact = ip.status == LpStatus::Optimal;
  out.ip_objective = ip.objective;

  std::vector<Conjunction> chosen;
  for (int k = 0; k < pool_at_build; ++k) {
    if (ip.x[static_cast<std::size_t>(n_pos + k)] > 0.5) {
      chosen.push_back(pool.entries()[static_cast<std::size_t>(k)].conj);
    }
  }
  out.ruleset = RuleSet::make(chosen);

  if (cfg.trace) {
    *cfg.trace << "colgen ip=" << out.ip_objective << " rules=" << chosen.size()
               << " exact=" << (out.ip_exact ? 1 : 0) << " nodes=" << ip.nodes
               << " t=" << timer.seconds() << "\n";
  }
  return out;
}

}  // namespace drrules
