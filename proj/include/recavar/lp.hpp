#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace recavar {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };

struct Term {
  std::size_t variable;
  double coefficient;
};

struct Constraint {
  std::vector<Term> terms;
  Relation relation;
  double rhs;
};

struct VariableBounds {
  double lower;
  double upper;
};

/// minimize c.x subject to sparse rows and per-variable bounds.
class LinearProgram {
 public:
  std::size_t add_variable(double cost, double lower = 0.0, double upper = kInfinity);
  std::size_t add_constraint(std::vector<Term> terms, Relation relation, double rhs);

  void set_cost(std::size_t variable, double cost) { objective_.at(variable) = cost; }
  void set_bounds(std::size_t variable, double lower, double upper);

  std::size_t variables() const noexcept { return objective_.size(); }
  std::size_t constraints() const noexcept { return rows_.size(); }
  std::span<const double> objective() const noexcept { return objective_; }
  std::span<const VariableBounds> bounds() const noexcept { return bounds_; }
  std::span<const Constraint> rows() const noexcept { return rows_; }

  double objective_value(std::span<const double> x) const;
  double row_activity(std::size_t row, std::span<const double> x) const;

 private:
  std::vector<double> objective_;
  std::vector<VariableBounds> bounds_;
  std::vector<Constraint> rows_;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;        // empty unless optimal
  double objective_value = 0.0;  // meaningful only when optimal
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-9;
  // Consecutive non-improving pivots before switching to Bland's rule.
  std::size_t stall_limit = 50;
  // 0 picks a limit from the problem size.
  std::size_t max_iterations = 0;
};

/**
 * Two-phase primal simplex on a dense tableau. Dantzig pricing until the
 * objective stalls for `stall_limit` pivots, then Bland's rule for the rest
 * of the phase. The final basic solution is recomputed from the original
 * data and checked with check_feasible; failure raises SolverError.
 */
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

/// Rows hold within `row_tolerance`, bounds within `bound_tolerance`.
bool check_feasible(const LinearProgram& lp, std::span<const double> x,
                    double row_tolerance = 1e-7, double bound_tolerance = 1e-9);

}  // namespace recavar
