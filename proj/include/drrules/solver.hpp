#pragma once
// Self-contained linear-programming solver with dual extraction, plus a
// branch-and-bound layer for mixed-integer problems.
//
// The LP core is a bounded-variable revised simplex with a product-form
// basis inverse (sparse eta updates, periodic refactorization), two-phase
// start with a crash basis that prefers slacks and singleton columns over
// artificials, Dantzig pricing with a Bland anti-cycling fallback, and
// deterministic tie-breaking throughout (lowest index). Problems at our
// scale are mostly-unit-basis (slack/xi columns), which the eta
// representation exploits.
//
// Branch and bound: most-fractional branching, depth-first with periodic
// best-bound restarts, deterministic node budgets (wall-clock limits are
// emergency brakes only, since timing-dependent cutoffs would break
// byte-reproducible runs).

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drrules/common.hpp"

namespace drrules {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : char { LE = 'L', EQ = 'E', GE = 'G' };

enum class LpStatus { Optimal, Infeasible, Unbounded, Limit, Numerical };

const char* to_string(LpStatus s);

struct LpProblem {
  bool maximize = false;
  std::vector<double> obj, lb, ub;  // per variable
  struct RowDef {
    RowSense sense;
    double rhs;
  };
  std::vector<RowDef> rows;
  // Column-wise coefficient storage: cols[j] lists (row, coefficient).
  std::vector<std::vector<std::pair<int, double>>> cols;

  int n_vars() const { return static_cast<int>(obj.size()); }
  int n_rows() const { return static_cast<int>(rows.size()); }

  int add_var(double objective, double lower, double upper);
  int add_row(RowSense sense, double rhs);
  void add_entry(int row, int var, double coef);

  // Throws on inconsistent dimensions, non-finite coefficients/rhs,
  // crossed bounds, or duplicate (row, var) entries.
  void validate() const;

  // Debug dump in the industry LP text format.
  void dump_lp(std::ostream& out) const;
};

struct LpSolution {
  LpStatus status = LpStatus::Numerical;
  double objective = 0;       // in the problem's own orientation
  double dual_objective = 0;  // for the strong-duality contract check
  std::vector<double> x;
  std::vector<double> duals;          // per row; min: >=0 on GE rows, <=0 on LE rows (negated for max)
  std::vector<double> reduced_costs;  // per variable, same orientation as duals
  long iterations = 0;

  // Branch-and-bound extras.
  long nodes = 0;
  double mip_bound = 0;  // best bound over unexplored nodes (= objective when exact)
  double mip_gap = 0;
  bool gap_flag = false;       // true when a budget cut the tree
  bool time_limited = false;   // the wall-clock brake fired (run not byte-reproducible)
};

// Incremental simplex instance. Supports column appends with warm restart
// (the new column enters nonbasic at its lower bound, so the current basis
// stays primal feasible) and bound changes followed by a fresh solve.
class SimplexSolver {
 public:
  explicit SimplexSolver(LpProblem p);
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  // Full solve from a crash basis (phase 1 if needed, then phase 2).
  LpSolution solve();
  // Continue from the current basis; valid after add_column on a solved
  // instance. Falls back to a full solve when no basis exists.
  LpSolution resolve();

  // Appends a variable (lower bound must be finite); returns its index.
  int add_column(double objective, const std::vector<std::pair<int, double>>& entries,
                 double lower, double upper);
  void set_bounds(int var, double lower, double upper);

  const LpProblem& problem() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LpProblem& p);

struct MipProblem {
  LpProblem lp;
  std::vector<int> integer_vars;
  double time_limit_s = kInf;                    // emergency brake
  long node_budget = 1'000'000;                  // deterministic primary limit
  std::optional<std::vector<double>> incumbent;  // optional warm integer-feasible point
};

// Best integer-feasible solution within budget; exact optimum (gap 0) when
// the tree is exhausted. status Limit + empty x distinguishes "budget hit
// with no integer solution" from a proven Infeasible.
LpSolution solve_mip(const MipProblem& p);

}  // namespace drrules
