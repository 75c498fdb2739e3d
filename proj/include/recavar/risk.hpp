#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "recavar/scenarios.hpp"

namespace recavar {

/**
 * Piecewise-constant level function gamma. Entry i holds the tail level
 * alpha_i used on the recovery range [r_{i-1}, r_i), with r_0 = 0 and the
 * last threshold equal to 1 (that entry also covers lambda = 1).
 *
 * Invariants: 0 <= alpha_1 < ... < alpha_{n+1} <= 1 and
 * 0 < r_1 < ... < r_{n+1} = 1.
 */
class LevelFunction {
 public:
  struct Entry {
    double alpha;
    double threshold;
  };

  explicit LevelFunction(std::vector<Entry> entries);

  /// Constant gamma == alpha, i.e. plain AV@R.
  static LevelFunction constant(double alpha) { return LevelFunction({{alpha, 1.0}}); }

  std::size_t size() const noexcept { return entries_.size(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  std::span<const Entry> entries() const noexcept { return entries_; }

  /// gamma(lambda) for lambda in [0,1].
  double operator()(double lambda) const;

  /// Throws std::domain_error if any alpha_i is 0 (the LP reductions divide by it).
  void require_positive_levels() const;

 private:
  std::vector<Entry> entries_;
};

/// A real random variable on a finite weighted outcome space.
class DiscreteVariable {
 public:
  DiscreteVariable(std::vector<double> values, std::vector<double> probabilities);

  static DiscreteVariable constant(double value) { return DiscreteVariable({value}, {1.0}); }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }

  /// Outcome-wise a*this + b*other + c; both must share probabilities.
  DiscreteVariable combine(double a, const DiscreteVariable& other, double b, double c = 0.0) const;
  DiscreteVariable shifted(double c) const;
  DiscreteVariable scaled(double a) const;

  bool same_outcomes(const DiscreteVariable& other) const;

 private:
  std::vector<double> values_;
  std::vector<double> probabilities_;
};

/// Weights on the simplex: nonnegative, summing to one within 1e-10.
class Portfolio {
 public:
  explicit Portfolio(std::vector<double> weights);

  /// Clips solver round-off (entries within 1e-9 of zero, sum within 1e-8
  /// of one) before validating.
  static Portfolio from_solver(std::vector<double> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  double operator[](std::size_t k) const { return weights_[k]; }

 private:
  std::vector<double> weights_;
};

/// sum_k x^k R^k - r Z per outcome, with the set's probabilities.
DiscreteVariable position(const ScenarioSet& scen, std::span<const double> weights,
                          double recovery = 0.0);
DiscreteVariable liability_variable(const ScenarioSet& scen);

/// inf{x : P(X + x < 0) <= alpha}, exact on the discrete law. At alpha = 1
/// the infimum is -inf; the largest atom with positive mass is used instead.
double value_at_risk(const DiscreteVariable& x, double alpha);

/// (1/alpha) * integral_0^alpha VaR_b(X) db by tail summation with the
/// boundary atom split; alpha = 0 gives minus the essential infimum.
double average_value_at_risk(const DiscreteVariable& x, double alpha);

struct RecAvarValue {
  double value;
  std::size_t index;  // attaining level, smallest on ties
};

/// max_i AV@R_{alpha_i}(X + (1 - r_i) Y). Requires Y >= 0 on every outcome.
RecAvarValue rec_avar(const DiscreteVariable& x, const DiscreteVariable& y,
                      const LevelFunction& gamma);

/// Rockafellar-Uryasev auxiliary function
///   (1/alpha) E[(v - sum_k x^k R^k + r Z)^+] - v.
double psi(const Portfolio& x, double v, const ScenarioSet& scen, double alpha, double recovery);
double psi(std::span<const double> position_values, std::span<const double> probabilities,
           double v, double alpha);

/// P(budget * sum_k x^k (1 + R^k) + capital >= lambda * budget * Z), ties
/// resolved within a relative 1e-12.
double recovery_probability(const ScenarioSet& scen, const Portfolio& x, double budget,
                            double capital, double lambda);

/// RecAV@R_gamma(deltaE1, L1) <= E0 (with 1e-12 slack).
bool check_solvency(double available_capital, const DiscreteVariable& delta_net_assets,
                    const DiscreteVariable& liability_values, const LevelFunction& gamma);

}  // namespace recavar
