#include "drrules/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace drrules {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::Limit: return "limit";
    case LpStatus::Numerical: return "numerical";
  }
  return "?";
}

int LpProblem::add_var(double objective, double lower, double upper) {
  obj.push_back(objective);
  lb.push_back(lower);
  ub.push_back(upper);
  cols.emplace_back();
  return n_vars() - 1;
}

int LpProblem::add_row(RowSense sense, double rhs) {
  rows.push_back({sense, rhs});
  return n_rows() - 1;
}

void LpProblem::add_entry(int row, int var, double coef) {
  if (row < 0 || row >= n_rows() || var < 0 || var >= n_vars()) {
    throw std::runtime_error("lp: entry index out of range");
  }
  if (coef != 0.0) cols[static_cast<std::size_t>(var)].emplace_back(row, coef);
}

void LpProblem::validate() const {
  if (obj.size() != lb.size() || obj.size() != ub.size() || obj.size() != cols.size()) {
    throw std::runtime_error("lp: inconsistent variable arrays");
  }
  for (int j = 0; j < n_vars(); ++j) {
    auto ju = static_cast<std::size_t>(j);
    if (!std::isfinite(obj[ju])) throw std::runtime_error("lp: non-finite objective coefficient");
    if (std::isnan(lb[ju]) || std::isnan(ub[ju]) || lb[ju] > ub[ju] + 1e-12) {
      throw std::runtime_error("lp: bad bounds on variable " + std::to_string(j));
    }
    std::vector<int> seen;
    for (const auto& [r, a] : cols[ju]) {
      if (r < 0 || r >= n_rows()) throw std::runtime_error("lp: row index out of range");
      if (!std::isfinite(a)) throw std::runtime_error("lp: non-finite matrix coefficient");
      seen.push_back(r);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw std::runtime_error("lp: duplicate entry in column " + std::to_string(j));
    }
  }
  for (const auto& row : rows) {
    if (!std::isfinite(row.rhs)) throw std::runtime_error("lp: non-finite rhs");
  }
}

void LpProblem::dump_lp(std::ostream& out) const {
  std::vector<std::vector<std::pair<int, double>>> by_row(static_cast<std::size_t>(n_rows()));
  for (int j = 0; j < n_vars(); ++j) {
    for (const auto& [r, a] : cols[static_cast<std::size_t>(j)]) {
      by_row[static_cast<std::size_t>(r)].emplace_back(j, a);
    }
  }
  auto term = [](double a, int j) {
    std::string s = a < 0 ? " - " : " + ";
    s += std::to_string(std::fabs(a)) + " x" + std::to_string(j);
    return s;
  };
  out << (maximize ? "Maximize\n obj:" : "Minimize\n obj:");
  for (int j = 0; j < n_vars(); ++j) {
    if (obj[static_cast<std::size_t>(j)] != 0) out << term(obj[static_cast<std::size_t>(j)], j);
  }
  out << "\nSubject To\n";
  for (int r = 0; r < n_rows(); ++r) {
    out << " c" << r << ":";
    for (const auto& [j, a] : by_row[static_cast<std::size_t>(r)]) out << term(a, j);
    const char* rel = rows[static_cast<std::size_t>(r)].sense == RowSense::LE   ? " <= "
                      : rows[static_cast<std::size_t>(r)].sense == RowSense::GE ? " >= "
                                                                                : " = ";
    out << rel << rows[static_cast<std::size_t>(r)].rhs << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < n_vars(); ++j) {
    auto ju = static_cast<std::size_t>(j);
    out << " " << lb[ju] << " <= x" << j << " <= " << ub[ju] << "\n";
  }
  out << "End\n";
}

namespace {
enum VarStatus : std::uint8_t { kAtLower, kAtUpper, kBasic, kFree };
constexpr double kDropTol = 1e-13;   // eta sparsity cutoff
constexpr double kRatioTie = 1e-10;  // ratio-test tie window
}  // namespace

struct SimplexSolver::Impl {
  LpProblem user;
  bool dirty = true;      // internal arrays out of sync with `user`
  bool has_basis = false;

  // Internal layout: structural [0, ns), slack [ns, ns+m), artificial beyond.
  // Costs are in MINIMIZE orientation.
  int m = 0, ns = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> cost, lo, up, xval;
  std::vector<double> rhs;
  std::vector<int> basic;            // row -> column
  std::vector<std::uint8_t> status;  // column -> VarStatus

  struct Eta {
    int r;
    double wr;
    std::vector<std::pair<int, double>> nz;  // entries excluding row r
  };
  std::vector<Eta> etas;
  static constexpr int kRefactorEvery = 128;

  std::vector<double> scratch;
  long total_iterations = 0;

  explicit Impl(LpProblem p) : user(std::move(p)) { user.validate(); }

  int n_total() const { return static_cast<int>(cols.size()); }
  bool fixed(int j) const {
    auto ju = static_cast<std::size_t>(j);
    return lo[ju] == up[ju];
  }
  double bound_value(int j) const {
    auto ju = static_cast<std::size_t>(j);
    switch (status[ju]) {
      case kAtLower: return lo[ju];
      case kAtUpper: return up[ju];
      default: return 0.0;
    }
  }

  void sync_from_user() {
    m = user.n_rows();
    ns = user.n_vars();
    const double sign = user.maximize ? -1.0 : 1.0;
    cols = user.cols;
    cost.assign(static_cast<std::size_t>(ns), 0.0);
    for (int j = 0; j < ns; ++j) {
      cost[static_cast<std::size_t>(j)] = sign * user.obj[static_cast<std::size_t>(j)];
    }
    lo = user.lb;
    up = user.ub;
    rhs.resize(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      rhs[static_cast<std::size_t>(r)] = user.rows[static_cast<std::size_t>(r)].rhs;
    }
    // One slack per row; the row sense lives in the slack bounds.
    for (int r = 0; r < m; ++r) {
      cols.push_back({{r, 1.0}});
      cost.push_back(0.0);
      switch (user.rows[static_cast<std::size_t>(r)].sense) {
        case RowSense::LE: lo.push_back(0.0); up.push_back(kInf); break;
        case RowSense::GE: lo.push_back(-kInf); up.push_back(0.0); break;
        case RowSense::EQ: lo.push_back(0.0); up.push_back(0.0); break;
      }
    }
    xval.assign(cols.size(), 0.0);
    status.assign(cols.size(), kAtLower);
    scratch.assign(static_cast<std::size_t>(m), 0.0);
    etas.clear();
    has_basis = false;
    dirty = false;
  }

  // ---- basis-inverse application -------------------------------------------

  void ftran(std::vector<double>& v) const {
    for (const auto& e : etas) {
      double piv = v[static_cast<std::size_t>(e.r)];
      if (piv == 0.0) continue;
      piv /= e.wr;
      v[static_cast<std::size_t>(e.r)] = piv;
      for (const auto& [i, a] : e.nz) v[static_cast<std::size_t>(i)] -= a * piv;
    }
  }

  void btran(std::vector<double>& v) const {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = v[static_cast<std::size_t>(it->r)];
      for (const auto& [i, a] : it->nz) s -= a * v[static_cast<std::size_t>(i)];
      v[static_cast<std::size_t>(it->r)] = s / it->wr;
    }
  }

  void scatter_column(int j, std::vector<double>& v) const {
    std::fill(v.begin(), v.end(), 0.0);
    for (const auto& [r, a] : cols[static_cast<std::size_t>(j)]) {
      v[static_cast<std::size_t>(r)] = a;
    }
  }

  // ---- refactorization ------------------------------------------------------

  // Rebuild the eta file from the current basis set. Unit columns pivot with
  // zero or trivial etas; only genuinely sparse columns eliminate. Returns
  // false on a numerically singular basis.
  bool rebuild() {
    std::vector<int> basis_cols(basic.begin(), basic.end());
    etas.clear();
    std::vector<std::uint8_t> row_done(static_cast<std::size_t>(m), 0);
    std::vector<int> general;

    for (int j : basis_cols) {
      const auto& cj = cols[static_cast<std::size_t>(j)];
      if (cj.size() == 1 && std::fabs(cj[0].second) >= tol::pivot &&
          !row_done[static_cast<std::size_t>(cj[0].first)]) {
        const int r = cj[0].first;
        row_done[static_cast<std::size_t>(r)] = 1;
        basic[static_cast<std::size_t>(r)] = j;
        if (cj[0].second != 1.0) etas.push_back({r, cj[0].second, {}});
      } else {
        general.push_back(j);
      }
    }
    for (int j : general) {
      scatter_column(j, scratch);
      ftran(scratch);
      int best_r = -1;
      double best_a = 0;
      for (int r = 0; r < m; ++r) {
        if (row_done[static_cast<std::size_t>(r)]) continue;
        const double a = scratch[static_cast<std::size_t>(r)];
        if (std::fabs(a) > std::fabs(best_a)) {
          best_a = a;
          best_r = r;
        }
      }
      if (best_r < 0 || std::fabs(best_a) < tol::pivot) return false;
      Eta e;
      e.r = best_r;
      e.wr = best_a;
      for (int r = 0; r < m; ++r) {
        if (r != best_r && std::fabs(scratch[static_cast<std::size_t>(r)]) > kDropTol) {
          e.nz.emplace_back(r, scratch[static_cast<std::size_t>(r)]);
        }
      }
      etas.push_back(std::move(e));
      row_done[static_cast<std::size_t>(best_r)] = 1;
      basic[static_cast<std::size_t>(best_r)] = j;
    }
    recompute_basics();
    return true;
  }

  // x_B = Binv (b - N x_N): refresh basic values against accumulated drift.
  void recompute_basics() {
    std::vector<double> v = rhs;
    for (int j = 0; j < n_total(); ++j) {
      auto ju = static_cast<std::size_t>(j);
      if (status[ju] == kBasic || xval[ju] == 0.0) continue;
      for (const auto& [r, a] : cols[ju]) v[static_cast<std::size_t>(r)] -= a * xval[ju];
    }
    ftran(v);
    for (int r = 0; r < m; ++r) {
      xval[static_cast<std::size_t>(basic[static_cast<std::size_t>(r)])] =
          v[static_cast<std::size_t>(r)];
    }
  }

  // ---- initial basis ---------------------------------------------------------

  // Nonbasics at their finite bound; per row prefer the slack, then a
  // singleton structural column, then an artificial. Covering-row problems
  // with per-row xi variables start with no artificials at all.
  void crash_basis() {
    // Discard artificials from any previous solve.
    cols.resize(static_cast<std::size_t>(ns + m));
    cost.resize(static_cast<std::size_t>(ns + m));
    lo.resize(static_cast<std::size_t>(ns + m));
    up.resize(static_cast<std::size_t>(ns + m));
    xval.resize(static_cast<std::size_t>(ns + m));
    status.assign(static_cast<std::size_t>(ns + m), kAtLower);

    for (int j = 0; j < ns + m; ++j) {
      auto ju = static_cast<std::size_t>(j);
      if (std::isfinite(lo[ju])) {
        status[ju] = kAtLower;
        xval[ju] = lo[ju];
      } else if (std::isfinite(up[ju])) {
        status[ju] = kAtUpper;
        xval[ju] = up[ju];
      } else {
        status[ju] = kFree;
        xval[ju] = 0.0;
      }
    }

    // resid[r] = rhs - (structural nonbasics at bounds); slacks excluded.
    std::vector<double> resid = rhs;
    for (int j = 0; j < ns; ++j) {
      auto ju = static_cast<std::size_t>(j);
      if (xval[ju] == 0.0) continue;
      for (const auto& [r, a] : cols[ju]) resid[static_cast<std::size_t>(r)] -= a * xval[ju];
    }

    std::vector<std::vector<int>> singletons(static_cast<std::size_t>(m));
    for (int j = 0; j < ns; ++j) {
      const auto& cj = cols[static_cast<std::size_t>(j)];
      if (cj.size() == 1 && std::fabs(cj[0].second) > tol::pivot) {
        singletons[static_cast<std::size_t>(cj[0].first)].push_back(j);
      }
    }

    basic.assign(static_cast<std::size_t>(m), -1);
    for (int r = 0; r < m; ++r) {
      auto ru = static_cast<std::size_t>(r);
      const int s = ns + r;
      auto su = static_cast<std::size_t>(s);
      // Slack bounds always include 0, and xval[slack] == 0 here.
      if (resid[ru] >= lo[su] - 1e-9 && resid[ru] <= up[su] + 1e-9) {
        basic[ru] = s;
        status[su] = kBasic;
        xval[su] = resid[ru];
        continue;
      }
      bool placed = false;
      for (int j : singletons[ru]) {
        auto ju = static_cast<std::size_t>(j);
        if (status[ju] == kBasic) continue;
        const double a = cols[ju][0].second;
        const double v = resid[ru] / a + xval[ju];
        if (v >= lo[ju] - 1e-9 && v <= up[ju] + 1e-9) {
          basic[ru] = j;
          status[ju] = kBasic;
          xval[ju] = v;
          placed = true;
          break;
        }
      }
      if (placed) continue;
      const double sign = resid[ru] >= 0 ? 1.0 : -1.0;
      cols.push_back({{r, sign}});
      cost.push_back(0.0);
      lo.push_back(0.0);
      up.push_back(kInf);
      xval.push_back(std::fabs(resid[ru]));
      status.push_back(kBasic);
      basic[ru] = n_total() - 1;
    }
    has_basis = true;
    etas.clear();
    if (!rebuild()) throw std::runtime_error("lp: singular crash basis");
  }

  int artificial_count() const { return n_total() - ns - m; }

  // ---- simplex core -----------------------------------------------------------

  double cost_of(int j, const std::vector<double>& c) const {
    auto ju = static_cast<std::size_t>(j);
    return ju < c.size() ? c[ju] : 0.0;
  }

  LpStatus primal_loop(const std::vector<double>& c, long cap) {
    std::vector<double> y(static_cast<std::size_t>(m));
    int degenerate_run = 0;
    bool bland = false;

    for (long iter = 0; iter < cap; ++iter) {
      ++total_iterations;

      for (int r = 0; r < m; ++r) {
        y[static_cast<std::size_t>(r)] = cost_of(basic[static_cast<std::size_t>(r)], c);
      }
      btran(y);

      // Pricing: Dantzig (largest violation) or Bland (lowest index).
      int enter = -1, dir = 0;
      double best_score = tol::reduced_cost;
      for (int j = 0; j < n_total(); ++j) {
        auto ju = static_cast<std::size_t>(j);
        if (status[ju] == kBasic || fixed(j)) continue;
        double d = cost_of(j, c);
        for (const auto& [r, a] : cols[ju]) d -= y[static_cast<std::size_t>(r)] * a;
        int this_dir = 0;
        if ((status[ju] == kAtLower || status[ju] == kFree) && d < -tol::reduced_cost) {
          this_dir = +1;
        } else if ((status[ju] == kAtUpper || status[ju] == kFree) && d > tol::reduced_cost) {
          this_dir = -1;
        }
        if (this_dir == 0) continue;
        if (bland) {
          enter = j;
          dir = this_dir;
          break;
        }
        if (std::fabs(d) > best_score) {
          best_score = std::fabs(d);
          enter = j;
          dir = this_dir;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      auto eu = static_cast<std::size_t>(enter);

      scatter_column(enter, scratch);
      ftran(scratch);

      // Ratio test over basic variables.
      double best_t = kInf;
      int leave_row = -1;
      double leave_pivot = 0;
      for (int r = 0; r < m; ++r) {
        const double w = scratch[static_cast<std::size_t>(r)];
        if (std::fabs(w) < tol::pivot) continue;
        const double rate = -dir * w;  // d(x_basic)/d(step)
        const int b = basic[static_cast<std::size_t>(r)];
        auto bu = static_cast<std::size_t>(b);
        double t;
        if (rate > 0) {
          if (!std::isfinite(up[bu])) continue;
          t = (up[bu] - xval[bu]) / rate;
        } else {
          if (!std::isfinite(lo[bu])) continue;
          t = (lo[bu] - xval[bu]) / rate;
        }
        if (t < 0) t = 0;  // drifted bound: force a degenerate pivot
        if (leave_row < 0 || t < best_t - kRatioTie) {
          best_t = t;
          leave_row = r;
          leave_pivot = w;
        } else if (t <= best_t + kRatioTie) {
          // Tie: prefer the larger pivot for stability, lowest basic index
          // under Bland.
          const bool take = bland
                                ? b < basic[static_cast<std::size_t>(leave_row)]
                                : std::fabs(w) > std::fabs(leave_pivot);
          if (take) {
            best_t = std::min(best_t, t);
            leave_row = r;
            leave_pivot = w;
          }
        }
      }

      const double t_flip = up[eu] - lo[eu];  // may be inf
      if (leave_row < 0 && !std::isfinite(t_flip)) return LpStatus::Unbounded;

      const double step_len = std::min(best_t, t_flip);
      if (!std::isfinite(step_len)) return LpStatus::Unbounded;

      // Anti-cycling: long runs of zero-length steps switch pricing to Bland.
      if (step_len <= 1e-12) {
        if (++degenerate_run > 60) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }

      // Move the basics along the direction.
      const double step = dir * step_len;
      if (step != 0.0) {
        for (int r = 0; r < m; ++r) {
          const double w = scratch[static_cast<std::size_t>(r)];
          if (w == 0.0) continue;
          auto bu = static_cast<std::size_t>(basic[static_cast<std::size_t>(r)]);
          xval[bu] -= step * w;
        }
      }

      if (t_flip <= best_t + kRatioTie) {
        // Bound flip: entering variable crosses to its opposite bound.
        xval[eu] = dir > 0 ? up[eu] : lo[eu];
        status[eu] = dir > 0 ? kAtUpper : kAtLower;
        continue;
      }

      // Pivot: entering becomes basic; leaving snaps exactly to its bound.
      const int leave = basic[static_cast<std::size_t>(leave_row)];
      auto lu = static_cast<std::size_t>(leave);
      const double rate = -dir * leave_pivot;
      if (rate > 0) {
        xval[lu] = up[lu];
        status[lu] = kAtUpper;
      } else {
        xval[lu] = lo[lu];
        status[lu] = kAtLower;
      }
      xval[eu] = bound_value(enter) + step;
      status[eu] = kBasic;
      basic[static_cast<std::size_t>(leave_row)] = enter;

      Eta e;
      e.r = leave_row;
      e.wr = leave_pivot;
      for (int r = 0; r < m; ++r) {
        if (r != leave_row && std::fabs(scratch[static_cast<std::size_t>(r)]) > kDropTol) {
          e.nz.emplace_back(r, scratch[static_cast<std::size_t>(r)]);
        }
      }
      etas.push_back(std::move(e));
      if (static_cast<int>(etas.size()) >= kRefactorEvery) {
        if (!rebuild()) return LpStatus::Numerical;
      }
    }
    return LpStatus::Limit;
  }

  long iter_cap() const { return 50000L + 40L * (m + n_total()); }

  double rhs_scale() const {
    double s = 0;
    for (double b : rhs) s = std::max(s, std::fabs(b));
    return s;
  }

  LpSolution solve_fresh() {
    if (dirty) sync_from_user();
    crash_basis();
    if (artificial_count() > 0) {
      std::vector<double> c1(static_cast<std::size_t>(n_total()), 0.0);
      for (int j = ns + m; j < n_total(); ++j) c1[static_cast<std::size_t>(j)] = 1.0;
      const LpStatus r1 = primal_loop(c1, iter_cap());
      if (r1 == LpStatus::Numerical || r1 == LpStatus::Limit) return finish(r1);
      double infeas = 0;
      for (int j = ns + m; j < n_total(); ++j) infeas += xval[static_cast<std::size_t>(j)];
      if (infeas > tol::feasibility * (1.0 + rhs_scale())) return finish(LpStatus::Infeasible);
      // Pin artificials to zero; basic ones stay harmlessly degenerate.
      for (int j = ns + m; j < n_total(); ++j) {
        auto ju = static_cast<std::size_t>(j);
        lo[ju] = 0.0;
        up[ju] = 0.0;
        if (status[ju] != kBasic) xval[ju] = 0.0;
      }
    }
    return finish(primal_loop(cost, iter_cap()));
  }

  LpSolution warm_continue() { return finish(primal_loop(cost, iter_cap())); }

  LpSolution finish(LpStatus st) {
    if (st == LpStatus::Optimal && has_basis) {
      if (!rebuild()) st = LpStatus::Numerical;
    }
    LpSolution out;
    out.iterations = total_iterations;
    const double sign = user.maximize ? -1.0 : 1.0;

    if (st == LpStatus::Optimal) {
      // Feasibility audit; failing it is a numerical abort, per contract.
      double worst = 0;
      std::vector<double> act(static_cast<std::size_t>(m), 0.0);
      for (int j = 0; j < n_total(); ++j) {
        auto ju = static_cast<std::size_t>(j);
        const double v = xval[ju];
        if (v == 0.0) continue;
        for (const auto& [r, a] : cols[ju]) act[static_cast<std::size_t>(r)] += a * v;
      }
      for (int r = 0; r < m; ++r) {
        auto ru = static_cast<std::size_t>(r);
        worst = std::max(worst, std::fabs(act[ru] - rhs[ru]) / (1.0 + std::fabs(rhs[ru])));
      }
      for (int j = 0; j < n_total(); ++j) {
        auto ju = static_cast<std::size_t>(j);
        if (std::isfinite(lo[ju])) {
          worst = std::max(worst, (lo[ju] - xval[ju]) / (1.0 + std::fabs(lo[ju])));
        }
        if (std::isfinite(up[ju])) {
          worst = std::max(worst, (xval[ju] - up[ju]) / (1.0 + std::fabs(up[ju])));
        }
      }
      if (worst > tol::feasibility * 10) st = LpStatus::Numerical;
    }

    out.status = st;
    if (st != LpStatus::Optimal && st != LpStatus::Limit) return out;

    double obj = 0;
    for (int j = 0; j < ns; ++j) {
      obj += cost[static_cast<std::size_t>(j)] * xval[static_cast<std::size_t>(j)];
    }
    out.objective = sign * obj;
    out.x.assign(xval.begin(), xval.begin() + ns);

    std::vector<double> y(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      y[static_cast<std::size_t>(r)] = cost_of(basic[static_cast<std::size_t>(r)], cost);
    }
    btran(y);
    out.duals.resize(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) {
      out.duals[static_cast<std::size_t>(r)] = sign * y[static_cast<std::size_t>(r)];
    }
    out.reduced_costs.resize(static_cast<std::size_t>(ns));
    double dual_obj = 0;
    for (int r = 0; r < m; ++r) {
      dual_obj += y[static_cast<std::size_t>(r)] * rhs[static_cast<std::size_t>(r)];
    }
    for (int j = 0; j < n_total(); ++j) {
      auto ju = static_cast<std::size_t>(j);
      double d = cost_of(j, cost);
      for (const auto& [r, a] : cols[ju]) d -= y[static_cast<std::size_t>(r)] * a;
      if (j < ns) out.reduced_costs[ju] = sign * d;
      if (status[ju] != kBasic && xval[ju] != 0.0) dual_obj += d * xval[ju];
    }
    out.dual_objective = sign * dual_obj;
    return out;
  }
};

SimplexSolver::SimplexSolver(LpProblem p) : impl_(std::make_unique<Impl>(std::move(p))) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

LpSolution SimplexSolver::solve() { return impl_->solve_fresh(); }

LpSolution SimplexSolver::resolve() {
  if (impl_->dirty || !impl_->has_basis) return impl_->solve_fresh();
  return impl_->warm_continue();
}

int SimplexSolver::add_column(double objective, const std::vector<std::pair<int, double>>& entries,
                              double lower, double upper) {
  Impl& s = *impl_;
  if (!std::isfinite(lower)) throw std::runtime_error("add_column: lower bound must be finite");
  const int user_idx = s.user.add_var(objective, lower, upper);
  for (const auto& [r, a] : entries) s.user.add_entry(r, user_idx, a);
  if (s.dirty || !s.has_basis) {
    s.dirty = true;
    return user_idx;
  }

  // Fast path: splice the new structural column in front of the slacks so the
  // current basis (still primal feasible) can continue warm.
  const double sign = s.user.maximize ? -1.0 : 1.0;
  const int pos = s.ns;
  s.cols.insert(s.cols.begin() + pos, s.user.cols.back());
  s.cost.insert(s.cost.begin() + pos, sign * objective);
  s.lo.insert(s.lo.begin() + pos, lower);
  s.up.insert(s.up.begin() + pos, upper);
  s.xval.insert(s.xval.begin() + pos, lower);
  s.status.insert(s.status.begin() + pos, kAtLower);
  s.ns += 1;
  for (auto& b : s.basic) {
    if (b >= pos) b += 1;
  }
  if (lower != 0.0) s.recompute_basics();
  return user_idx;
}

void SimplexSolver::set_bounds(int var, double lower, double upper) {
  Impl& s = *impl_;
  if (var < 0 || var >= s.user.n_vars()) throw std::runtime_error("set_bounds: bad index");
  auto vu = static_cast<std::size_t>(var);
  s.user.lb[vu] = lower;
  s.user.ub[vu] = upper;
  s.dirty = true;  // feasibility of the old basis is void: next solve is fresh
}

const LpProblem& SimplexSolver::problem() const { return impl_->user; }

LpSolution solve_lp(const LpProblem& p) { return SimplexSolver(p).solve(); }

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

LpSolution solve_mip(const MipProblem& mp) {
  mp.lp.validate();
  for (int j : mp.integer_vars) {
    if (j < 0 || j >= mp.lp.n_vars()) throw std::runtime_error("mip: bad integer index");
  }
  Timer timer;
  const double sign = mp.lp.maximize ? -1.0 : 1.0;  // node scores are minimize-form

  SimplexSolver solver(mp.lp);
  LpSolution root = solver.solve();
  if (root.status != LpStatus::Optimal) return root;

  struct Node {
    std::vector<std::pair<int, std::pair<double, double>>> path;  // var -> (lb, ub)
    double bound;                                                 // parent score
  };

  LpSolution best;
  best.status = LpStatus::Limit;
  bool have_incumbent = false;
  double incumbent_score = kInf;

  auto try_incumbent = [&](const std::vector<double>& x, double user_obj) {
    const double score = sign * user_obj;
    if (have_incumbent && score >= incumbent_score - 1e-12) return;
    incumbent_score = score;
    have_incumbent = true;
    best.x = x;
    for (int j : mp.integer_vars) {
      auto ju = static_cast<std::size_t>(j);
      best.x[ju] = std::round(best.x[ju]);
    }
    best.objective = user_obj;
  };

  if (mp.incumbent.has_value()) {
    // Externally supplied warm point: accept only if it fully checks out.
    const auto& x = *mp.incumbent;
    if (static_cast<int>(x.size()) == mp.lp.n_vars()) {
      bool ok = true;
      for (int j = 0; j < mp.lp.n_vars() && ok; ++j) {
        auto ju = static_cast<std::size_t>(j);
        ok = x[ju] >= mp.lp.lb[ju] - 1e-9 && x[ju] <= mp.lp.ub[ju] + 1e-9;
      }
      for (std::size_t k = 0; k < mp.integer_vars.size() && ok; ++k) {
        auto ju = static_cast<std::size_t>(mp.integer_vars[k]);
        ok = std::fabs(x[ju] - std::round(x[ju])) <= tol::integrality;
      }
      if (ok) {
        std::vector<double> act(static_cast<std::size_t>(mp.lp.n_rows()), 0.0);
        double obj = 0;
        for (int j = 0; j < mp.lp.n_vars(); ++j) {
          auto ju = static_cast<std::size_t>(j);
          obj += mp.lp.obj[ju] * x[ju];
          for (const auto& [r, a] : mp.lp.cols[ju]) act[static_cast<std::size_t>(r)] += a * x[ju];
        }
        for (int r = 0; r < mp.lp.n_rows() && ok; ++r) {
          auto ru = static_cast<std::size_t>(r);
          const auto& row = mp.lp.rows[ru];
          const double tolr = 1e-7 * (1.0 + std::fabs(row.rhs));
          if (row.sense == RowSense::LE) ok = act[ru] <= row.rhs + tolr;
          else if (row.sense == RowSense::GE) ok = act[ru] >= row.rhs - tolr;
          else ok = std::fabs(act[ru] - row.rhs) <= tolr;
        }
        if (ok) try_incumbent(x, obj);
      }
    }
  }

  std::vector<Node> stack;
  stack.push_back({{}, sign * root.objective});

  std::vector<int> applied;  // vars with modified bounds in the solver
  auto apply_path = [&](const Node& node) {
    for (int var : applied) {
      solver.set_bounds(var, mp.lp.lb[static_cast<std::size_t>(var)],
                        mp.lp.ub[static_cast<std::size_t>(var)]);
    }
    applied.clear();
    for (const auto& [var, b] : node.path) {
      solver.set_bounds(var, b.first, b.second);
      applied.push_back(var);
    }
  };

  long nodes = 0;
  long lp_iters = root.iterations;
  bool budget_hit = false, time_hit = false;
  double open_bound = kInf;  // min score among subtrees we did not certify

  while (!stack.empty()) {
    if (nodes >= mp.node_budget) {
      budget_hit = true;
      break;
    }
    if ((nodes & 31) == 0 && timer.seconds() > mp.time_limit_s) {
      budget_hit = true;
      time_hit = true;
      break;
    }

    // Depth-first, with a periodic jump to the best-bound node.
    std::size_t pick = stack.size() - 1;
    if ((nodes & 63) == 63) {
      for (std::size_t i = 0; i < stack.size(); ++i) {
        if (stack[i].bound < stack[pick].bound) pick = i;
      }
    }
    Node node = std::move(stack[pick]);
    stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(pick));
    ++nodes;

    if (have_incumbent && node.bound >= incumbent_score - 1e-9) continue;

    apply_path(node);
    LpSolution sol = solver.solve();
    lp_iters += sol.iterations;
    if (sol.status == LpStatus::Infeasible) continue;
    if (sol.status != LpStatus::Optimal) {
      // Could not certify this subtree; keep the reported gap honest.
      open_bound = std::min(open_bound, node.bound);
      budget_hit = true;
      continue;
    }
    const double score = sign * sol.objective;
    if (have_incumbent && score >= incumbent_score - 1e-9) continue;

    // Most-fractional branching variable (lowest index on ties).
    int branch = -1;
    double best_dist = tol::integrality;
    for (int j : mp.integer_vars) {
      auto ju = static_cast<std::size_t>(j);
      const double v = sol.x[ju];
      const double dist = std::min(v - std::floor(v), std::ceil(v) - v);
      if (dist > best_dist + 1e-12) {
        best_dist = dist;
        branch = j;
      }
    }
    if (branch < 0) {
      try_incumbent(sol.x, sol.objective);
      continue;
    }

    auto bu = static_cast<std::size_t>(branch);
    const double v = sol.x[bu];
    double lo_cur = mp.lp.lb[bu], up_cur = mp.lp.ub[bu];
    for (const auto& [var, b] : node.path) {
      if (var == branch) {
        lo_cur = b.first;
        up_cur = b.second;
      }
    }
    auto drop_var = [&](Node& nd) {
      nd.path.erase(std::remove_if(nd.path.begin(), nd.path.end(),
                                   [&](const auto& e) { return e.first == branch; }),
                    nd.path.end());
    };
    Node down{node.path, score}, upn{node.path, score};
    drop_var(down);
    drop_var(upn);
    down.path.push_back({branch, {lo_cur, std::floor(v)}});
    upn.path.push_back({branch, {std::ceil(v), up_cur}});
    if (v - std::floor(v) >= 0.5) {  // explore the closer side first
      stack.push_back(std::move(down));
      stack.push_back(std::move(upn));
    } else {
      stack.push_back(std::move(upn));
      stack.push_back(std::move(down));
    }
  }

  for (const auto& nd : stack) open_bound = std::min(open_bound, nd.bound);

  best.nodes = nodes;
  best.iterations = lp_iters;
  best.time_limited = time_hit;
  if (have_incumbent) {
    const bool exact = stack.empty() && !budget_hit;
    best.status = exact ? LpStatus::Optimal : LpStatus::Limit;
    best.gap_flag = !exact;
    const double bound_score = exact ? incumbent_score : std::min(open_bound, incumbent_score);
    best.mip_bound = sign * bound_score;
    best.mip_gap =
        exact ? 0.0 : (incumbent_score - bound_score) / std::max(1.0, std::fabs(incumbent_score));
    return best;
  }
  LpSolution none;
  none.nodes = nodes;
  none.iterations = lp_iters;
  none.time_limited = time_hit;
  none.status = (stack.empty() && !budget_hit) ? LpStatus::Infeasible : LpStatus::Limit;
  none.gap_flag = none.status == LpStatus::Limit;
  return none;
}

}  // namespace drrules
