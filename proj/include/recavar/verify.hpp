#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recavar/risk.hpp"
#include "recavar/scenarios.hpp"

namespace recavar {

/// (1/alpha) * integral_0^alpha VaR_b(X) db by the midpoint rule on
/// `grid_size` panels, with its own quantile code. alpha = 0 throws
/// std::domain_error, grid_size = 0 std::invalid_argument.
double avar_bruteforce(const DiscreteVariable& x, double alpha, std::size_t grid_size);

struct MinimaxSides {
  double lhs;  // max_i min_v Psi^i(x, v)
  double rhs;  // min over (v^1..v^{n+1}) of max_i Psi^i(x, v^i)
};

/// lhs by golden-section search per level between the lower and upper
/// alpha_i-quantiles of the position; rhs from an LP with the weights fixed.
MinimaxSides minimax_gap(const ScenarioSet& scen, const Portfolio& x, const LevelFunction& gamma);

/// Convex-or-not piecewise linear function on the real line.
class PiecewiseLinearFunction {
 public:
  /// slopes.size() == breakpoints.size() + 1; `anchor` is f(breakpoints[0]).
  PiecewiseLinearFunction(std::vector<double> breakpoints, std::vector<double> slopes,
                          double anchor);

  double operator()(double x) const;
  bool convex() const;
  /// Minimum value; -infinity when unbounded below.
  double minimum() const;

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> slopes() const noexcept { return slopes_; }

  PiecewiseLinearFunction shifted(double c) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<double> values_;  // f at each breakpoint
};

/// min over a shared x of max_i f_i(x).
double min_of_max(const std::vector<PiecewiseLinearFunction>& functions);

struct CounterexampleValues {
  double max_min;            // max_i min_x f_i(x)
  double min_max_shared;     // min_x max_i f_i(x), one scalar for all i
  double min_max_separate;   // min over (x_1, x_2) of max_i f_i(x_i)
};

/// The two functions with minima on [-2,-1] and [1,2], each shifted by `shift`.
std::vector<PiecewiseLinearFunction> counterexample_functions(double shift = 0.0);
CounterexampleValues appendix_counterexample(double shift = 0.0);

struct CaseOneClosedForm {
  double x_star;
  double avar_beta;
};

/**
 * Two-asset example with R^1 = 0 and R^2 = 0.5% w.p. 99.9%, -4% w.p. 0.1%,
 * alpha = 1%: x* = min{(1-r) ell / (AV@R_beta(R^2) - AV@R_alpha(R^2)), 1}.
 * Requires beta in (0, 0.01), r and ell in (0, 1); std::domain_error otherwise.
 */
CaseOneClosedForm case1_closed_form(double beta, double r, double ell);

/// AV@R_beta(R^2) for the two-point law above, beta in (0, 0.01].
double case1_avar(double beta);

struct PropertyResult {
  std::string name;
  std::size_t trials;
  std::size_t passed;
  double worst_violation;
};

struct PropertyReport {
  std::uint64_t seed;
  std::vector<PropertyResult> properties;

  bool all_passed() const;
  std::string text() const;
  std::string csv() const;
};

/// Randomized checks of cash invariance, monotonicity, subadditivity and
/// positive homogeneity of rec_avar, AV@R >= VaR and AV@R monotonicity in
/// the level. trials = 0 throws std::invalid_argument.
PropertyReport property_suite(std::uint64_t seed, std::size_t trials);

struct RandomInstance {
  ScenarioSet scen;
  LevelFunction gamma;
  Portfolio weights;
};

/// m <= 50 weighted outcomes, K <= 3 assets, n+1 <= 4 levels with alphas in
/// [0.1%, 20%], random liabilities >= 0 and random weights on the simplex.
RandomInstance random_instance(std::uint64_t seed);

struct MinimaxBatch {
  std::size_t instances;
  double worst_gap;  // max |lhs - rhs|
};

/// minimax_gap over `count` random instances derived from `seed`.
MinimaxBatch minimax_batch(std::uint64_t seed, std::size_t count);

/// Tolerance used by property_suite.
inline constexpr double kPropertyTolerance = 1e-10;

}  // namespace recavar
