#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "recavar/lp.hpp"
#include "recavar/risk.hpp"
#include "recavar/scenarios.hpp"

namespace recavar {

/// The scenario set's own probabilities.
struct NominalModel {};

/// Worst case over convex combinations of the listed probability vectors,
/// all on the outcomes of the scenario set.
struct MixtureModel {
  std::vector<std::vector<double>> probability_vectors;
};

/// Worst case over pi + eps with lower <= eps <= upper and sum(eps) = 0,
/// where pi are the scenario probabilities.
struct BoxModel {
  std::vector<double> lower;
  std::vector<double> upper;

  /// eps_j in [-c, c] for every outcome.
  static BoxModel symmetric(std::size_t outcomes, double c);
};

using UncertaintyModel = std::variant<NominalModel, MixtureModel, BoxModel>;

/// Throws std::invalid_argument (mixture) or std::domain_error (box) when the
/// model does not fit the scenario set.
void validate_model(const ScenarioSet& scen, const UncertaintyModel& model);

// Variable layout shared by every mean-risk LP: T first, then v^1..v^{n+1},
// then the weights x^1..x^K. Auxiliary variables follow.
inline constexpr std::size_t kRiskVariable = 0;
inline std::size_t level_variable(std::size_t level) { return 1 + level; }
inline std::size_t weight_variable(std::size_t levels, std::size_t asset) {
  return 1 + levels + asset;
}

/**
 * min T subject to
 *   (1/alpha_i) sum_s p_s u^i_s - v^i <= T,
 *   u^i_s >= v^i - sum_k x^k R^k_s + r_i Z_s,  u >= 0,
 *   sum_k x^k E[R^k] >= mu,  x in the simplex.
 * Throws std::domain_error if some alpha_i is 0.
 */
LinearProgram build_nominal_lp(const ScenarioSet& scen, const LevelFunction& gamma, double mu);

/// Risk rows for every (level, vector) pair over shared u, one return row per vector.
LinearProgram build_mixture_lp(const ScenarioSet& scen,
                               const std::vector<std::vector<double>>& vectors,
                               const LevelFunction& gamma, double mu);

/**
 * Box version with the inner max over eps replaced by its dual: per level
 * (z^i, sigma^i >= 0, tau^i <= 0) with u^i_j = z^i + sigma^i_j + tau^i_j, and
 * for the return side (w, zeta <= 0, eta >= 0) with
 * w + zeta_j + eta_j = sum_k x^k R^k_j.
 */
LinearProgram build_box_lp(const ScenarioSet& scen, std::span<const double> lower,
                           std::span<const double> upper, const LevelFunction& gamma, double mu);

/// max { sum_j eps_j u_j : lower <= eps <= upper, sum eps = 0 }, computed
/// from the one-dimensional dual
///   min_z sum_j [upper_j (u_j - z)^+ - lower_j (z - u_j)^+].
/// Throws std::domain_error when the set is empty.
double worst_case_inner_value(std::span<const double> u, std::span<const double> lower,
                              std::span<const double> upper);

/// A maximizing eps: start at `lower`, then spend -sum(lower) on the largest
/// u_j first (ties by index).
std::vector<double> worst_case_perturbation(std::span<const double> u,
                                            std::span<const double> lower,
                                            std::span<const double> upper);

enum class SolveStatus { optimal, infeasible, unbounded, failed };

const char* to_string(SolveStatus status);

enum class SolveMethod {
  automatic,      // extended LP when its tableau is small, cutting planes otherwise
  extended_lp,    // the full LP from the build_* functions
  cutting_plane,  // delayed generation of the same constraints
};

struct SolveOptions {
  SolveMethod method = SolveMethod::automatic;
  // Estimated dense tableau cells above which `automatic` switches methods.
  double max_tableau_cells = 1.5e6;
  std::size_t max_cut_rounds = 2000;
  double cut_tolerance = 1e-10;
};

struct OptimalPortfolio {
  SolveStatus status = SolveStatus::failed;
  std::optional<Portfolio> weights;
  double risk = 0.0;            // optimal worst-case RecAV@R of sum x R - r Z
  std::vector<double> v_star;   // one per level
  std::string message;          // set when status is failed
};

/**
 * Minimal worst-case RecAV@R over the weights whose worst-case mean return is
 * at least mu. For the nominal model the optimum is re-evaluated with
 * rec_avar at the returned weights and must agree within 1e-6.
 */
OptimalPortfolio solve_mean_risk(const ScenarioSet& scen, const LevelFunction& gamma, double mu,
                                 const UncertaintyModel& model, const SolveOptions& options = {});

/// Worst-case mean return sum_k x^k E_q[R^k] minimized over the model's measures.
double worst_case_mean(const ScenarioSet& scen, const UncertaintyModel& model,
                       std::span<const double> weights);

struct MuRange {
  double mu_min;
  double mu_max;
};

/// mu_max maximizes the worst-case mean over the simplex; mu_min is its minimum
/// (attained at a single asset).
MuRange feasible_mu_range(const ScenarioSet& scen, const UncertaintyModel& model);

struct FrontierPoint {
  double mu;
  SolveStatus status;
  double risk;
  std::optional<Portfolio> weights;
};

struct FrontierOptions {
  SolveOptions solve;
  std::size_t threads = 1;
};

/// One point per grid entry, in grid order. A failing solve marks its point
/// and the sweep continues.
std::vector<FrontierPoint> efficient_frontier(const ScenarioSet& scen, const LevelFunction& gamma,
                                              const UncertaintyModel& model,
                                              std::span<const double> mu_grid,
                                              const FrontierOptions& options = {});

}  // namespace recavar
