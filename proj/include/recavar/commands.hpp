#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recavar/optimize.hpp"
#include "recavar/risk.hpp"

namespace recavar {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `alpha:r(,alpha:r)*`, alphas and thresholds strictly increasing, last r
/// equal to 1. Throws ParseError naming the 1-based character position.
LevelFunction parse_level_function(std::string_view text);

/// `lo:hi:steps` with steps >= 1 evenly spaced points from lo to hi.
std::vector<double> parse_mu_grid(std::string_view text);

/// Comma-separated reals.
std::vector<double> parse_real_list(std::string_view text);

/// General format with 17 significant digits.
std::string format_real(double value);

struct Case1Options {
  double beta = 0.005;
  double r = 0.99;
  double ell = 0.10;
  std::optional<std::filesystem::path> out_prefix;  // PREFIX_allocation.csv, PREFIX_recovery.csv
};

/// Allocation table (closed form vs LP over a beta grid plus `beta`) and the
/// recovery-probability table under AV@R and RecAV@R capital.
int run_case1(const Case1Options& options, std::ostream& out, std::ostream& err);

struct Case2Options {
  std::size_t m = 5000;
  std::uint64_t seed = 1;
  std::vector<double> ells{0.10, 0.50};
  std::vector<double> box_sizes{0.0, 1e-6, 2e-6, 3e-6};
  std::optional<std::vector<double>> mu_grid;  // default: 21 points on [0, min mu_max]
  std::string levels = "0.005:0.9,0.01:1";
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> scenarios_out;  // the sampled returns (liability of the first ell)
  std::size_t threads = 1;
};

struct Case2Row {
  double ell;
  double box_size;
  double mu;
  SolveStatus status;
  double risk;
  std::vector<double> weights;
};

struct Case2Result {
  std::vector<Case2Row> rows;  // ordered by ell, then box size, then mu
  std::vector<double> mu_grid;
  bool monotone_in_mu = true;
  bool monotone_in_box = true;
  bool dominance_in_ell = true;
  double min_ratio = 0.0;  // risk(largest ell) / risk(smallest ell) over common feasible points
  double max_ratio = 0.0;
  std::size_t ratio_points = 0;
};

/// The two-asset sampled model (normal and Student t marginals joined by a
/// t-copula) under box uncertainty, one frontier per (ell, C).
Case2Result compute_case2(const Case2Options& options);
std::string format_case2(const Case2Result& result);
int run_case2(const Case2Options& options, std::ostream& out, std::ostream& err);

int run_verify(std::uint64_t seed, std::size_t trials, std::ostream& out, std::ostream& err);

struct ModelOptions {
  std::optional<double> box_size;
  std::vector<std::filesystem::path> mixture_files;
};

/// Builds the model for `scen`; mixture files must share its support.
UncertaintyModel make_model(const ScenarioSet& scen, const ModelOptions& options);

struct EvalOptions {
  std::filesystem::path scenarios;
  std::string levels;
  std::vector<double> weights;
  std::optional<double> budget;
};
int run_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct OptimizeOptions {
  std::filesystem::path scenarios;
  std::string levels;
  double mu = 0.0;
  ModelOptions model;
  std::optional<double> budget;
};
int run_optimize(const OptimizeOptions& options, std::ostream& out, std::ostream& err);

struct FrontierCommandOptions {
  std::filesystem::path scenarios;
  std::string levels;
  std::optional<std::vector<double>> mu_grid;  // default: 21 points on [mu_min, mu_max]
  ModelOptions model;
  std::optional<std::filesystem::path> out;
  std::size_t threads = 1;
};
int run_frontier(const FrontierCommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace recavar
