#include "recavar/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "recavar/errors.hpp"

namespace recavar {

std::size_t LinearProgram::add_variable(double cost, double lower, double upper) {
  if (!std::isfinite(cost)) throw std::invalid_argument("objective coefficient must be finite");
  if (std::isnan(lower) || std::isnan(upper) || lower > upper || lower == kInfinity ||
      upper == -kInfinity) {
    throw std::invalid_argument("invalid variable bounds");
  }
  objective_.push_back(cost);
  bounds_.push_back({lower, upper});
  return objective_.size() - 1;
}

void LinearProgram::set_bounds(std::size_t variable, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper) || lower > upper || lower == kInfinity ||
      upper == -kInfinity) {
    throw std::invalid_argument("invalid variable bounds");
  }
  bounds_.at(variable) = {lower, upper};
}

std::size_t LinearProgram::add_constraint(std::vector<Term> terms, Relation relation, double rhs) {
  if (!std::isfinite(rhs)) throw std::invalid_argument("constraint rhs must be finite");
  for (const auto& t : terms) {
    if (t.variable >= objective_.size()) {
      throw std::invalid_argument("constraint references unknown variable");
    }
    if (!std::isfinite(t.coefficient)) {
      throw std::invalid_argument("constraint coefficients must be finite");
    }
  }
  rows_.push_back({std::move(terms), relation, rhs});
  return rows_.size() - 1;
}

double LinearProgram::objective_value(std::span<const double> x) const {
  double value = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) value += objective_[j] * x[j];
  return value;
}

double LinearProgram::row_activity(std::size_t row, std::span<const double> x) const {
  double activity = 0.0;
  for (const auto& t : rows_.at(row).terms) activity += t.coefficient * x[t.variable];
  return activity;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal:
      return "optimal";
    case LpStatus::infeasible:
      return "infeasible";
    case LpStatus::unbounded:
      return "unbounded";
  }
  return "unknown";
}

bool check_feasible(const LinearProgram& lp, std::span<const double> x, double row_tolerance,
                    double bound_tolerance) {
  if (x.size() != lp.variables()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j])) return false;
    const auto& b = lp.bounds()[j];
    if (x[j] < b.lower - bound_tolerance || x[j] > b.upper + bound_tolerance) return false;
  }
  for (std::size_t r = 0; r < lp.constraints(); ++r) {
    const double activity = lp.row_activity(r, x);
    const auto& row = lp.rows()[r];
    switch (row.relation) {
      case Relation::less_equal:
        if (activity > row.rhs + row_tolerance) return false;
        break;
      case Relation::greater_equal:
        if (activity < row.rhs - row_tolerance) return false;
        break;
      case Relation::equal:
        if (std::abs(activity - row.rhs) > row_tolerance) return false;
        break;
    }
  }
  return true;
}

namespace {

enum class ColumnKind { shifted, negated, split };

// How an original variable maps onto nonnegative standard-form columns:
// shifted: x = offset + y, negated: x = offset - y, split: x = y+ - y-.
struct ColumnMap {
  ColumnKind kind;
  std::size_t column;
  double offset;
};

// Standard form  A y = b, y >= 0, b >= 0, laid out as a dense tableau with
// the objective in the last row and the right-hand side in the last column.
class SimplexTableau {
 public:
  SimplexTableau(const LinearProgram& lp, const SimplexOptions& options)
      : lp_(lp), options_(options) {
    build();
  }

  LpSolution solve() {
    max_iterations_ = options_.max_iterations != 0 ? options_.max_iterations
                                                   : 100 * (rows_ + cols_) + 10000;
    LpSolution solution;

    if (artificial_count_ > 0) {
      load_phase_one_objective();
      if (!run_phase(/*phase_one=*/true)) {
        throw SolverError("phase one reported unbounded; tableau is corrupted");
      }
      double b_scale = 1.0;
      for (std::size_t r = 0; r < rows_; ++r) b_scale = std::max(b_scale, original_rhs_[r]);
      if (objective_value() > options_.feasibility_tolerance * b_scale) {
        solution.status = LpStatus::infeasible;
        solution.iterations = iterations_;
        return solution;
      }
      drive_out_artificials();
    }

    load_phase_two_objective();
    if (!run_phase(/*phase_one=*/false)) {
      solution.status = LpStatus::unbounded;
      solution.iterations = iterations_;
      return solution;
    }

    solution.x = extract_solution();
    if (!check_feasible(lp_, solution.x)) {
      throw SolverError("simplex solution failed the residual check");
    }
    solution.status = LpStatus::optimal;
    solution.objective_value = lp_.objective_value(solution.x);
    solution.iterations = iterations_;
    return solution;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double objective_value() const { return -at(rows_, cols_); }

  void build() {
    const std::size_t n = lp_.variables();
    maps_.resize(n);
    std::size_t structural = 0;
    std::vector<std::size_t> upper_rows;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = lp_.bounds()[j];
      if (std::isfinite(b.lower)) {
        maps_[j] = {ColumnKind::shifted, structural++, b.lower};
        if (std::isfinite(b.upper)) upper_rows.push_back(j);
      } else if (std::isfinite(b.upper)) {
        maps_[j] = {ColumnKind::negated, structural++, b.upper};
      } else {
        maps_[j] = {ColumnKind::split, structural, 0.0};
        structural += 2;
      }
    }
    structural_ = structural;
    rows_ = lp_.constraints() + upper_rows.size();

    // Dense rows of the structural part, relation and rhs before slacks.
    std::vector<double> dense(rows_ * structural_, 0.0);
    std::vector<Relation> relation(rows_);
    std::vector<double> rhs_values(rows_);
    for (std::size_t r = 0; r < lp_.constraints(); ++r) {
      const auto& row = lp_.rows()[r];
      double b = row.rhs;
      for (const auto& t : row.terms) {
        const auto& m = maps_[t.variable];
        switch (m.kind) {
          case ColumnKind::shifted:
            dense[r * structural_ + m.column] += t.coefficient;
            b -= t.coefficient * m.offset;
            break;
          case ColumnKind::negated:
            dense[r * structural_ + m.column] -= t.coefficient;
            b -= t.coefficient * m.offset;
            break;
          case ColumnKind::split:
            dense[r * structural_ + m.column] += t.coefficient;
            dense[r * structural_ + m.column + 1] -= t.coefficient;
            break;
        }
      }
      relation[r] = row.relation;
      rhs_values[r] = b;
    }
    for (std::size_t u = 0; u < upper_rows.size(); ++u) {
      const std::size_t r = lp_.constraints() + u;
      const std::size_t j = upper_rows[u];
      dense[r * structural_ + maps_[j].column] = 1.0;
      relation[r] = Relation::less_equal;
      rhs_values[r] = lp_.bounds()[j].upper - lp_.bounds()[j].lower;
    }

    // Slack per inequality; flip rows to b >= 0; artificial where no +1 slack.
    std::vector<double> slack_sign(rows_, 0.0);
    std::vector<double> row_sign(rows_, 1.0);
    std::size_t slack_count = 0;
    std::vector<std::size_t> slack_column(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (relation[r] != Relation::equal) {
        slack_sign[r] = relation[r] == Relation::less_equal ? 1.0 : -1.0;
        slack_column[r] = structural_ + slack_count++;
      }
      if (rhs_values[r] < 0.0) row_sign[r] = -1.0;
    }
    std::vector<bool> needs_artificial(rows_);
    artificial_count_ = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
      needs_artificial[r] = !(slack_sign[r] * row_sign[r] > 0.0);
      if (needs_artificial[r]) ++artificial_count_;
    }
    artificial_begin_ = structural_ + slack_count;
    cols_ = artificial_begin_ + artificial_count_;

    data_.assign((rows_ + 1) * (cols_ + 1), 0.0);
    basis_.assign(rows_, 0);
    original_rhs_.resize(rows_);
    std::size_t next_artificial = artificial_begin_;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double sign = row_sign[r];
      for (std::size_t c = 0; c < structural_; ++c) at(r, c) = sign * dense[r * structural_ + c];
      if (slack_sign[r] != 0.0) at(r, slack_column[r]) = sign * slack_sign[r];
      rhs(r) = sign * rhs_values[r];
      original_rhs_[r] = rhs(r);
      if (needs_artificial[r]) {
        at(r, next_artificial) = 1.0;
        basis_[r] = next_artificial++;
      } else {
        basis_[r] = slack_column[r];
      }
    }
    original_ = data_;
  }

  bool is_artificial(std::size_t c) const { return c >= artificial_begin_; }

  void load_phase_one_objective() {
    for (std::size_t c = 0; c <= cols_; ++c) at(rows_, c) = 0.0;
    for (std::size_t c = artificial_begin_; c < cols_; ++c) at(rows_, c) = 1.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(rows_, c) -= at(r, c);
    }
  }

  double standard_cost(std::size_t c) const { return costs_.empty() ? 0.0 : costs_[c]; }

  void load_phase_two_objective() {
    costs_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < lp_.variables(); ++j) {
      const double cj = lp_.objective()[j];
      const auto& m = maps_[j];
      switch (m.kind) {
        case ColumnKind::shifted:
          costs_[m.column] = cj;
          break;
        case ColumnKind::negated:
          costs_[m.column] = -cj;
          break;
        case ColumnKind::split:
          costs_[m.column] = cj;
          costs_[m.column + 1] = -cj;
          break;
      }
    }
    for (std::size_t c = 0; c < cols_; ++c) at(rows_, c) = costs_[c];
    at(rows_, cols_) = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = costs_[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(rows_, c) -= cb * at(r, c);
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const double inv = 1.0 / at(pr, pc);
    nonzero_.clear();
    for (std::size_t c = 0; c <= cols_; ++c) {
      if (at(pr, c) != 0.0) {
        at(pr, c) *= inv;
        nonzero_.push_back(c);
      }
    }
    at(pr, pc) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double factor = at(r, pc);
      if (factor == 0.0) continue;
      double* row = &at(r, 0);
      const double* prow = &at(pr, 0);
      for (std::size_t c : nonzero_) row[c] -= factor * prow[c];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Returns false when the phase is unbounded.
  bool run_phase(bool phase_one) {
    bool bland = false;
    std::size_t stall = 0;
    double last_objective = objective_value();
    const double tol = options_.optimality_tolerance;

    while (true) {
      if (++iterations_ > max_iterations_) {
        throw SolverError("simplex iteration limit reached");
      }
      std::size_t enter = cols_;
      double best = -tol;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!phase_one && is_artificial(c)) continue;
        const double d = at(rows_, c);
        if (d < -tol) {
          if (bland) {
            enter = c;
            break;
          }
          if (d < best) {
            best = d;
            enter = c;
          }
        }
      }
      if (enter == cols_) return true;

      std::size_t leave = rows_;
      double best_ratio = 0.0;
      double best_pivot = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= options_.pivot_tolerance) continue;
        const double ratio = std::max(rhs(r), 0.0) / a;
        if (leave == rows_) {
          leave = r;
          best_ratio = ratio;
          best_pivot = a;
          continue;
        }
        const double slack = 1e-12 * (1.0 + best_ratio);
        if (ratio < best_ratio - slack) {
          leave = r;
          best_ratio = ratio;
          best_pivot = a;
        } else if (ratio <= best_ratio + slack) {
          const bool better = bland ? basis_[r] < basis_[leave] : a > best_pivot;
          if (better) {
            leave = r;
            best_ratio = std::min(ratio, best_ratio);
            best_pivot = a;
          }
        }
      }
      if (leave == rows_) return false;

      pivot(leave, enter);
      const double now = objective_value();
      if (now < last_objective - 1e-13 * (1.0 + std::abs(last_objective))) {
        stall = 0;
        last_objective = now;
      } else if (++stall >= options_.stall_limit) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      std::size_t best = cols_;
      double best_abs = 1e-9;
      for (std::size_t c = 0; c < artificial_begin_; ++c) {
        const double a = std::abs(at(r, c));
        if (a > best_abs) {
          best_abs = a;
          best = c;
        }
      }
      // A row without such an entry is redundant; its artificial stays at 0
      // and can never leave because artificials are barred from entering.
      if (best != cols_) pivot(r, best);
    }
  }

  // Solves B y_B = b on the untouched standard-form data; false if singular.
  bool refine_basic_values(std::vector<double>& values) const {
    const std::size_t n = rows_;
    std::vector<double> mat(n * (n + 1));
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < n; ++k) {
        mat[r * (n + 1) + k] = original_[r * (cols_ + 1) + basis_[k]];
      }
      mat[r * (n + 1) + n] = original_rhs_[r];
    }
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      double piv_abs = std::abs(mat[col * (n + 1) + col]);
      for (std::size_t r = col + 1; r < n; ++r) {
        const double a = std::abs(mat[r * (n + 1) + col]);
        if (a > piv_abs) {
          piv_abs = a;
          piv = r;
        }
      }
      if (piv_abs < 1e-13) return false;
      if (piv != col) {
        for (std::size_t k = 0; k <= n; ++k) std::swap(mat[piv * (n + 1) + k], mat[col * (n + 1) + k]);
      }
      const double inv = 1.0 / mat[col * (n + 1) + col];
      for (std::size_t r = col + 1; r < n; ++r) {
        const double f = mat[r * (n + 1) + col] * inv;
        if (f == 0.0) continue;
        for (std::size_t k = col; k <= n; ++k) mat[r * (n + 1) + k] -= f * mat[col * (n + 1) + k];
      }
    }
    values.assign(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
      double acc = mat[i * (n + 1) + n];
      for (std::size_t k = i + 1; k < n; ++k) acc -= mat[i * (n + 1) + k] * values[k];
      values[i] = acc / mat[i * (n + 1) + i];
    }
    return true;
  }

  std::vector<double> extract_solution() const {
    std::vector<double> y(cols_, 0.0);
    std::vector<double> refined;
    const bool ok = rows_ > 0 && refine_basic_values(refined);
    for (std::size_t r = 0; r < rows_; ++r) {
      double value = ok ? refined[r] : at(r, cols_);
      // Keep the tableau value when refinement disagrees wildly (ill-conditioned basis).
      if (ok && std::abs(value - at(r, cols_)) > 1e-6 * (1.0 + std::abs(at(r, cols_)))) {
        value = at(r, cols_);
      }
      y[basis_[r]] = std::max(value, 0.0);
    }
    std::vector<double> x(lp_.variables());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const auto& m = maps_[j];
      switch (m.kind) {
        case ColumnKind::shifted:
          x[j] = m.offset + y[m.column];
          break;
        case ColumnKind::negated:
          x[j] = m.offset - y[m.column];
          break;
        case ColumnKind::split:
          x[j] = y[m.column] - y[m.column + 1];
          break;
      }
      const auto& b = lp_.bounds()[j];
      x[j] = std::clamp(x[j], b.lower, b.upper);
    }
    return x;
  }

  const LinearProgram& lp_;
  const SimplexOptions& options_;
  std::vector<ColumnMap> maps_;
  std::size_t structural_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t artificial_begin_ = 0;
  std::size_t artificial_count_ = 0;
  std::vector<double> data_;
  std::vector<double> original_;
  std::vector<double> original_rhs_;
  std::vector<std::size_t> basis_;
  std::vector<double> costs_;
  std::vector<std::size_t> nonzero_;
  std::size_t iterations_ = 0;
  std::size_t max_iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  if (lp.variables() == 0) {
    LpSolution empty;
    empty.status = LpStatus::optimal;
    for (std::size_t r = 0; r < lp.constraints(); ++r) {
      const auto& row = lp.rows()[r];
      const bool ok = (row.relation == Relation::less_equal && 0.0 <= row.rhs) ||
                      (row.relation == Relation::greater_equal && 0.0 >= row.rhs) ||
                      (row.relation == Relation::equal && row.rhs == 0.0);
      if (!ok) empty.status = LpStatus::infeasible;
    }
    return empty;
  }
  SimplexTableau tableau(lp, options);
  return tableau.solve();
}

}  // namespace recavar
