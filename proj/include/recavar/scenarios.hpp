#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "recavar/distributions.hpp"

namespace recavar {

/**
 * Weighted discrete joint law of (R^1, ..., R^K, Z): m outcomes, each with a
 * row of K relative returns, a liability fraction Z and a probability.
 *
 * Validated on construction (m, K >= 1, finite entries, probabilities >= 0
 * summing to one within 1e-12) and immutable afterwards.
 */
class ScenarioSet {
 public:
  /// `returns` is row-major, outcomes x assets.
  ScenarioSet(std::size_t assets, std::vector<double> returns, std::vector<double> liabilities,
              std::vector<double> probabilities);

  std::size_t outcomes() const noexcept { return liabilities_.size(); }
  std::size_t assets() const noexcept { return assets_; }

  double asset_return(std::size_t outcome, std::size_t asset) const {
    return returns_[outcome * assets_ + asset];
  }
  std::span<const double> returns_row(std::size_t outcome) const {
    return {returns_.data() + outcome * assets_, assets_};
  }
  std::span<const double> returns() const noexcept { return returns_; }
  std::span<const double> liabilities() const noexcept { return liabilities_; }
  std::span<const double> probabilities() const noexcept { return probabilities_; }

  /// Same support, different weights (validated like the constructor).
  ScenarioSet with_probabilities(std::vector<double> probabilities) const;

  /// True when both sets have identical returns and liabilities.
  bool same_support(const ScenarioSet& other) const;

  /// E[R^k] under the set's own probabilities.
  std::vector<double> mean_returns() const;
  std::vector<double> mean_returns(std::span<const double> probabilities) const;

  /// Per-outcome sum_k x^k R^k_s.
  std::vector<double> portfolio_returns(std::span<const double> weights) const;

  friend bool operator==(const ScenarioSet&, const ScenarioSet&) = default;

 private:
  std::size_t assets_;
  std::vector<double> returns_;
  std::vector<double> liabilities_;
  std::vector<double> probabilities_;
};

/// Checks a probability vector against the ScenarioSet invariants; throws
/// std::invalid_argument naming `what` on failure.
void validate_probabilities(std::span<const double> probabilities, const char* what);

struct NormalMarginal {
  double mean;
  double stddev;
};
struct StudentTMarginal {
  double mean;
  double scale;
  double degrees_of_freedom;
};
struct TwoPointMarginal {
  double value_up;
  double prob_up;
  double value_down;
};
struct ConstantMarginal {
  double value;
};

using MarginalSpec =
    std::variant<NormalMarginal, StudentTMarginal, TwoPointMarginal, ConstantMarginal>;

/// Lower quantile of the marginal at the given tail probability.
double marginal_quantile(const MarginalSpec& marginal, TailProbability p);
void validate_marginal(const MarginalSpec& marginal);

struct IndependentDependence {};
struct TCopulaDependence {
  std::vector<std::vector<double>> correlation;
  double degrees_of_freedom;
};
using DependenceSpec = std::variant<IndependentDependence, TCopulaDependence>;

struct SamplerSpec {
  std::vector<MarginalSpec> marginals;
  DependenceSpec dependence = IndependentDependence{};
  MarginalSpec liability = ConstantMarginal{0.0};
};

/**
 * Draws `count` equally weighted outcomes. The stream is a 64-bit Mersenne
 * Twister (std::mt19937_64, fully specified by the standard) seeded with
 * `seed`; every variate is produced by inverse transform from 53-bit
 * uniforms, so output is identical across platforms and runs.
 *
 * t-copula: Y ~ N(0, correlation), W ~ chi^2_nu, T = Y / sqrt(W / nu),
 * U_k = F_{t,nu}(T_k), R^k = Q_k(U_k). Throws std::invalid_argument when the
 * spec is invalid (including a correlation matrix that is not PSD).
 */
ScenarioSet sample_scenarios(const SamplerSpec& spec, std::size_t count, std::uint64_t seed);

void validate_sampler(const SamplerSpec& spec);

/// Two outcomes of (R^1 = 0, R^2, Z = liability): R^2 = up with probability
/// p_up and down otherwise.
ScenarioSet exact_two_point_set(double up, double p_up, double down, double liability);

/// Lower-triangular L with L L^T = matrix for a symmetric PSD matrix.
/// Throws std::invalid_argument otherwise.
std::vector<std::vector<double>> psd_cholesky(const std::vector<std::vector<double>>& matrix);

// Text format: header `R1,...,RK,Z,prob`, one comma-separated row per
// outcome, values written with 17 significant digits.
ScenarioSet load_scenarios(const std::filesystem::path& path);
void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path);
ScenarioSet parse_scenarios(std::string_view text);
std::string format_scenarios(const ScenarioSet& set);

}  // namespace recavar
