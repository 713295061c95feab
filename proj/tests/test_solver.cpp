#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "drrules/common.hpp"
#include "drrules/solver.hpp"

using namespace drrules;

namespace {

// Max violation of rows and bounds at x, in the problem's own units.
double primal_violation(const LpProblem& p, const std::vector<double>& x) {
  double worst = 0;
  std::vector<double> act(static_cast<std::size_t>(p.n_rows()), 0.0);
  for (int j = 0; j < p.n_vars(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    worst = std::max(worst, p.lb[ju] - x[ju]);
    worst = std::max(worst, x[ju] - p.ub[ju]);
    for (const auto& [r, a] : p.cols[ju]) act[static_cast<std::size_t>(r)] += a * x[ju];
  }
  for (int r = 0; r < p.n_rows(); ++r) {
    const auto ru = static_cast<std::size_t>(r);
    const double diff = act[ru] - p.rows[ru].rhs;
    switch (p.rows[ru].sense) {
      case RowSense::LE: worst = std::max(worst, diff); break;
      case RowSense::GE: worst = std::max(worst, -diff); break;
      case RowSense::EQ: worst = std::max(worst, std::fabs(diff)); break;
    }
  }
  return worst;
}

double objective_of(const LpProblem& p, const std::vector<double>& x) {
  double v = 0;
  for (int j = 0; j < p.n_vars(); ++j)
    v += p.obj[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
  return v;
}

}  // namespace

TEST_CASE("one-variable maximization with a binding row gives dual 1") {
  LpProblem p;
  p.maximize = true;
  int x = p.add_var(1.0, 0.0, kInf);
  int r = p.add_row(RowSense::LE, 3.0);
  p.add_entry(r, x, 1.0);
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("crossed single-variable rows are infeasible") {
  LpProblem p;
  int x = p.add_var(0.0, 0.0, kInf);
  int r1 = p.add_row(RowSense::GE, 1.0);
  int r2 = p.add_row(RowSense::LE, 0.0);
  p.add_entry(r1, x, 1.0);
  p.add_entry(r2, x, 1.0);
  CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("two slack variables with lower-bounding rows") {
  LpProblem p;
  int x1 = p.add_var(1.0, 0.0, kInf);
  int x2 = p.add_var(1.0, 0.0, kInf);
  int r1 = p.add_row(RowSense::GE, 0.5);
  int r2 = p.add_row(RowSense::GE, 0.5);
  p.add_entry(r1, x1, 1.0);
  p.add_entry(r2, x2, 1.0);
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
  CHECK(s.duals[1] == doctest::Approx(1.0));
}

TEST_CASE("unbounded maximization is detected") {
  LpProblem p;
  p.maximize = true;
  p.add_var(1.0, 0.0, kInf);  // no rows at all
  CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("free variables and ranged bounds") {
  LpProblem p;
  int x = p.add_var(1.0, -kInf, kInf);  // min x, free
  int r = p.add_row(RowSense::GE, -3.0);
  p.add_entry(r, x, 1.0);
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(-3.0));

  LpProblem q;
  q.add_var(-1.0, -2.0, 5.0);  // min -x on [-2,5]: sits at the upper bound
  LpSolution t = solve_lp(q);
  REQUIRE(t.status == LpStatus::Optimal);
  CHECK(t.x[0] == doctest::Approx(5.0));
  CHECK(t.objective == doctest::Approx(-5.0));
}

TEST_CASE("problem validation rejects malformed input") {
  LpProblem p;
  int x = p.add_var(1.0, 0.0, kInf);
  int r = p.add_row(RowSense::LE, 1.0);
  CHECK_THROWS_AS(p.add_entry(r + 5, x, 1.0), std::runtime_error);
  CHECK_THROWS_AS(p.add_entry(r, x + 5, 1.0), std::runtime_error);
  p.add_entry(r, x, 1.0);
  p.add_entry(r, x, 2.0);  // duplicate caught at validate time
  CHECK_THROWS_AS(p.validate(), std::runtime_error);

  LpProblem crossed;
  crossed.add_var(0.0, 2.0, 1.0);
  CHECK_THROWS_AS(crossed.validate(), std::runtime_error);
}

TEST_CASE("knapsack MIP picks the better item") {
  MipProblem mp;
  mp.lp.maximize = true;
  int w1 = mp.lp.add_var(3.0, 0.0, 1.0);
  int w2 = mp.lp.add_var(2.0, 0.0, 1.0);
  int r = mp.lp.add_row(RowSense::LE, 1.0);
  mp.lp.add_entry(r, w1, 1.0);
  mp.lp.add_entry(r, w2, 1.0);
  mp.integer_vars = {w1, w2};
  LpSolution s = solve_mip(mp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.x[1] == doctest::Approx(0.0));
  CHECK(s.mip_gap == doctest::Approx(0.0));
}

TEST_CASE("integral LP relaxation returns without branching") {
  MipProblem mp;
  int x = mp.lp.add_var(1.0, 0.0, 7.0);  // min x with x >= 2
  int r = mp.lp.add_row(RowSense::GE, 2.0);
  mp.lp.add_entry(r, x, 1.0);
  mp.integer_vars = {x};
  LpSolution s = solve_mip(mp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.0));
  CHECK(s.nodes <= 1);  // root only
}

TEST_CASE("MIP with no integer-feasible point reports infeasible") {
  MipProblem mp;
  int x = mp.lp.add_var(1.0, 0.0, 1.0);
  int r1 = mp.lp.add_row(RowSense::GE, 0.4);  // 0.4 <= x <= 0.6 has no integer
  int r2 = mp.lp.add_row(RowSense::LE, 0.6);
  mp.lp.add_entry(r1, x, 1.0);
  mp.lp.add_entry(r2, x, 1.0);
  mp.integer_vars = {x};
  CHECK(solve_mip(mp).status == LpStatus::Infeasible);
}

TEST_CASE("random 10-variable binary programs match exhaustive enumeration") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10;
    MipProblem mp;
    mp.lp.maximize = true;
    std::vector<double> c(n);
    for (int j = 0; j < n; ++j) {
      c[static_cast<std::size_t>(j)] = std::floor(rng.uniform() * 200.0 - 100.0) / 10.0;
      mp.lp.add_var(c[static_cast<std::size_t>(j)], 0.0, 1.0);
      mp.integer_vars.push_back(j);
    }
    const int n_rows = 2 + static_cast<int>(rng.uniform_int(3));
    std::vector<std::vector<double>> a(static_cast<std::size_t>(n_rows),
                                       std::vector<double>(n, 0.0));
    std::vector<double> rhs(static_cast<std::size_t>(n_rows));
    for (int r = 0; r < n_rows; ++r) {
      const auto ru = static_cast<std::size_t>(r);
      int row = mp.lp.add_row(RowSense::LE, 0.0);
      for (int j = 0; j < n; ++j) {
        double coef = std::floor(rng.uniform() * 90.0) / 10.0;  // nonnegative
        if (coef == 0.0) continue;
        a[ru][static_cast<std::size_t>(j)] = coef;
        mp.lp.add_entry(row, j, coef);
      }
      rhs[ru] = std::floor(rng.uniform() * 200.0) / 10.0;
      mp.lp.rows[static_cast<std::size_t>(row)].rhs = rhs[ru];
    }

    LpSolution s = solve_mip(mp);
    REQUIRE(s.status == LpStatus::Optimal);

    double best = -kInf;
    for (int mask = 0; mask < (1 << n); ++mask) {
      bool ok = true;
      for (int r = 0; r < n_rows && ok; ++r) {
        double act = 0;
        for (int j = 0; j < n; ++j)
          if (mask & (1 << j)) act += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
        ok = act <= rhs[static_cast<std::size_t>(r)] + 1e-9;
      }
      if (!ok) continue;
      double v = 0;
      for (int j = 0; j < n; ++j)
        if (mask & (1 << j)) v += c[static_cast<std::size_t>(j)];
      best = std::max(best, v);
    }
    CHECK(s.objective == doctest::Approx(best).epsilon(1e-9));
    CHECK(primal_violation(mp.lp, s.x) <= tol::feasibility * 10);
  }
}

TEST_CASE("random LPs self-certify strong duality and feasibility") {
  Rng rng(77);
  int optimal_seen = 0;
  for (int trial = 0; trial < 40; ++trial) {
    LpProblem p;
    p.maximize = rng.uniform() < 0.5;
    const int n = 3 + static_cast<int>(rng.uniform_int(6));
    const int m = 2 + static_cast<int>(rng.uniform_int(5));
    for (int j = 0; j < n; ++j) {
      double c = rng.uniform() * 4.0 - 2.0;
      p.add_var(c, 0.0, rng.uniform() < 0.3 ? kInf : 10.0);
    }
    for (int r = 0; r < m; ++r) {
      double u = rng.uniform();
      RowSense sense = u < 0.5 ? RowSense::LE : (u < 0.8 ? RowSense::GE : RowSense::EQ);
      int row = p.add_row(sense, rng.uniform() * 8.0 - 2.0);
      for (int j = 0; j < n; ++j) {
        if (rng.uniform() < 0.4) continue;
        p.add_entry(row, j, rng.uniform() * 4.0 - 2.0);
      }
    }
    p.validate();
    LpSolution s = solve_lp(p);
    if (s.status == LpStatus::Optimal) {
      ++optimal_seen;
      CHECK(primal_violation(p, s.x) <= tol::feasibility * 10);
      CHECK(std::fabs(s.objective - objective_of(p, s.x)) <= 1e-6 * (1 + std::fabs(s.objective)));
      CHECK(std::fabs(s.objective - s.dual_objective) <=
            tol::duality * (1 + std::fabs(s.objective)));
    } else {
      CHECK((s.status == LpStatus::Infeasible || s.status == LpStatus::Unbounded));
    }
  }
  CHECK(optimal_seen >= 15);  // the generator must actually exercise the solver
}

TEST_CASE("column append with warm resolve matches a fresh solve") {
  // Covering LP: min sum xi + w-costs, xi_i + sum_{k covers i} w_k >= 1.
  LpProblem p;
  const int n_pts = 4;
  for (int i = 0; i < n_pts; ++i) p.add_var(1.0, 0.0, kInf);  // xi
  for (int i = 0; i < n_pts; ++i) {
    int r = p.add_row(RowSense::GE, 1.0);
    p.add_entry(r, i, 1.0);
  }
  int w0 = p.add_var(0.3, 0.0, 1.0);  // covers points 0,1
  p.add_entry(0, w0, 1.0);
  p.add_entry(1, w0, 1.0);

  SimplexSolver solver(p);
  LpSolution first = solver.solve();
  REQUIRE(first.status == LpStatus::Optimal);
  CHECK(first.objective == doctest::Approx(0.3 + 2.0));

  // New column covering points 2,3 should be picked up by the warm resolve.
  int w1 = solver.add_column(0.5, {{2, 1.0}, {3, 1.0}}, 0.0, 1.0);
  LpSolution second = solver.resolve();
  REQUIRE(second.status == LpStatus::Optimal);
  CHECK(second.objective == doctest::Approx(0.8));
  CHECK(second.x[static_cast<std::size_t>(w1)] == doctest::Approx(1.0));

  LpSolution fresh = solve_lp(solver.problem());
  REQUIRE(fresh.status == LpStatus::Optimal);
  CHECK(fresh.objective == doctest::Approx(second.objective));

  // Tightening a bound after the fact is honored by the next resolve.
  solver.set_bounds(w1, 0.0, 0.0);
  LpSolution third = solver.resolve();
  REQUIRE(third.status == LpStatus::Optimal);
  CHECK(third.objective == doctest::Approx(0.3 + 2.0));
}

TEST_CASE("degenerate LPs terminate (anti-cycling)") {
  // Many redundant rows through the origin force degenerate pivots.
  LpProblem p;
  p.maximize = true;
  const int n = 4;
  for (int j = 0; j < n; ++j) p.add_var(1.0, 0.0, kInf);
  for (int r = 0; r < 12; ++r) {
    int row = p.add_row(RowSense::LE, 0.0);
    for (int j = 0; j < n; ++j) p.add_entry(row, j, (r + j) % 3 == 0 ? 1.0 : 2.0);
  }
  int cap = p.add_row(RowSense::LE, 1.0);
  for (int j = 0; j < n; ++j) p.add_entry(cap, j, 1.0);
  LpSolution s = solve_lp(p);
  CHECK(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("deterministic: identical problems give identical solutions") {
  auto build = [] {
    LpProblem p;
    Rng rng(5);
    for (int j = 0; j < 6; ++j) p.add_var(rng.uniform() - 0.5, 0.0, 3.0);
    for (int r = 0; r < 4; ++r) {
      int row = p.add_row(RowSense::LE, 2.0 + rng.uniform());
      for (int j = 0; j < 6; ++j) p.add_entry(row, j, rng.uniform());
    }
    return p;
  };
  LpSolution a = solve_lp(build());
  LpSolution b = solve_lp(build());
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.x == b.x);  // bitwise equality, not approximate
  CHECK(a.duals == b.duals);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("node budget produces an honest bound and gap") {
  // A knapsack-style instance large enough to need branching.
  MipProblem mp;
  mp.lp.maximize = true;
  Rng rng(99);
  const int n = 18;
  int cap_row = mp.lp.add_row(RowSense::LE, 0.0);
  double wsum = 0;
  for (int j = 0; j < n; ++j) {
    double value = 1.0 + rng.uniform() * 9.0;
    double weight = 1.0 + rng.uniform() * 9.0;
    mp.lp.add_var(value, 0.0, 1.0);
    mp.lp.add_entry(cap_row, j, weight);
    mp.integer_vars.push_back(j);
    wsum += weight;
  }
  mp.lp.rows[0].rhs = wsum * 0.37;

  mp.node_budget = 4;  // far too small to finish
  LpSolution cut = solve_mip(mp);
  if (cut.status == LpStatus::Limit) {
    CHECK(cut.gap_flag);
    CHECK(cut.mip_bound >= cut.objective - 1e-9);  // max: bound from above
    CHECK(cut.mip_gap >= 0);
  }

  mp.node_budget = 1'000'000;
  LpSolution full = solve_mip(mp);
  REQUIRE(full.status == LpStatus::Optimal);
  CHECK(full.mip_gap == doctest::Approx(0.0));
  CHECK(full.mip_bound == doctest::Approx(full.objective));
  if (!cut.x.empty()) CHECK(full.objective >= objective_of(mp.lp, cut.x) - 1e-9);
}

TEST_CASE("LP text dump mentions every section") {
  LpProblem p;
  p.maximize = true;
  int x = p.add_var(1.0, 0.0, 2.0);
  int r = p.add_row(RowSense::LE, 3.0);
  p.add_entry(r, x, 1.5);
  std::ostringstream out;
  p.dump_lp(out);
  std::string text = out.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
