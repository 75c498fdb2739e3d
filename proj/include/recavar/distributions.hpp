#pragma once

// Univariate distribution helpers used by the scenario samplers.

namespace recavar {

// A probability split into its lower and upper tail, P and 1 - P. Both are
// carried so that values near 1 keep their precision through the upper tail.
struct TailProbability {
  double lower;
  double upper;

  static TailProbability from_lower(double p) { return {p, 1.0 - p}; }
};

double normal_cdf(double x);

/// Standard normal quantile. Throws std::domain_error unless 0 < p < 1.
double normal_quantile(double p);
double normal_quantile(TailProbability p);

double student_t_cdf(double x, double degrees_of_freedom);
TailProbability student_t_tails(double x, double degrees_of_freedom);

/// Student-t quantile with `degrees_of_freedom` > 0. Throws std::domain_error
/// unless 0 < p < 1.
double student_t_quantile(double p, double degrees_of_freedom);
double student_t_quantile(TailProbability p, double degrees_of_freedom);

/// Quantile of the chi-square law with `degrees_of_freedom` > 0.
double chi_squared_quantile(double p, double degrees_of_freedom);

}  // namespace recavar
