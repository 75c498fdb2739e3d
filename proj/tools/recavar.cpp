// Command-line driver: eval, optimize, frontier, case1, case2, verify.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "recavar/commands.hpp"
#include "recavar/errors.hpp"

namespace {

struct Flags {
  std::string scenarios;
  std::string levels;
  std::optional<double> mu;
  std::string mu_grid;
  std::optional<double> box_c;
  std::vector<std::string> mixture;
  std::uint64_t seed = 1;
  std::string out;
  std::string weights;
  std::optional<double> budget;
  double beta = 0.005;
  double r = 0.99;
  double ell = 0.10;
  std::string ells = "0.1,0.5";
  std::string box_sizes = "0,1e-6,2e-6,3e-6";
  std::size_t m = 5000;
  std::size_t trials = 1000;
  std::size_t threads = 1;
  std::string scenarios_out;
};

recavar::ModelOptions model_from(const Flags& f) {
  recavar::ModelOptions model;
  model.box_size = f.box_c;
  for (const auto& path : f.mixture) model.mixture_files.emplace_back(path);
  return model;
}

std::optional<std::filesystem::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

void add_model_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--box-c", f.box_c, "symmetric box size C, perturbations in [-C, C]");
  cmd->add_option("--mixture", f.mixture, "scenario file whose prob column is a mixture vector")
      ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RecAV@R risk evaluation and mean-risk portfolio optimization"};
  app.require_subcommand(1);
  Flags f;

  auto* eval = app.add_subcommand("eval", "RecAV@R of a fixed portfolio");
  eval->add_option("--scenarios", f.scenarios, "scenario file")->required();
  eval->add_option("--levels", f.levels, "level function alpha:r,...")->required();
  eval->add_option("--weights", f.weights, "comma-separated portfolio weights")->required();
  eval->add_option("--budget", f.budget, "budget b for the balance-sheet value");

  auto* optimize = app.add_subcommand("optimize", "minimal worst-case RecAV@R at a target return");
  optimize->add_option("--scenarios", f.scenarios, "scenario file")->required();
  optimize->add_option("--levels", f.levels, "level function alpha:r,...")->required();
  optimize->add_option("--mu", f.mu, "target expected return")->required();
  optimize->add_option("--budget", f.budget, "budget b for the balance-sheet value");
  add_model_flags(optimize, f);

  auto* frontier = app.add_subcommand("frontier", "efficient frontier over a return grid");
  frontier->add_option("--scenarios", f.scenarios, "scenario file")->required();
  frontier->add_option("--levels", f.levels, "level function alpha:r,...")->required();
  frontier->add_option("--mu-grid", f.mu_grid, "lo:hi:steps (default: feasible range)");
  frontier->add_option("--out", f.out, "output file (default stdout)");
  frontier->add_option("--threads", f.threads, "worker threads");
  add_model_flags(frontier, f);

  auto* case1 = app.add_subcommand("case1", "two-asset example with an exact discrete law");
  case1->add_option("--beta", f.beta, "lower level beta in (0, 1%)");
  case1->add_option("--r", f.r, "recovery threshold r in (0,1)");
  case1->add_option("--ell", f.ell, "liabilities as a fraction of the budget");
  case1->add_option("--out", f.out, "output prefix for PREFIX_allocation.csv and PREFIX_recovery.csv");

  auto* case2 = app.add_subcommand("case2", "sampled two-asset frontiers under box uncertainty");
  case2->add_option("--m", f.m, "number of sampled outcomes (>= 100)");
  case2->add_option("--seed", f.seed, "sampler seed");
  case2->add_option("--ell", f.ells, "comma-separated liability fractions");
  case2->add_option("--box-c", f.box_sizes, "comma-separated box sizes C");
  case2->add_option("--mu-grid", f.mu_grid, "lo:hi:steps (default: 0 to the smallest mu_max)");
  case2->add_option("--levels", f.levels, "level function (default 0.005:0.9,0.01:1)");
  case2->add_option("--out", f.out, "output file (default stdout)");
  case2->add_option("--scenarios-out", f.scenarios_out, "also write the sampled scenarios");
  case2->add_option("--threads", f.threads, "worker threads");

  auto* verify = app.add_subcommand("verify", "randomized property and theorem checks");
  verify->add_option("--seed", f.seed, "master seed");
  verify->add_option("--trials", f.trials, "trials per property");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? recavar::kExitOk : recavar::kExitUsage;
  }

  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
  try {
    if (*eval) {
      recavar::EvalOptions options{f.scenarios, f.levels, recavar::parse_real_list(f.weights),
                                   f.budget};
      return recavar::run_eval(options, out, err);
    }
    if (*optimize) {
      recavar::OptimizeOptions options{f.scenarios, f.levels, *f.mu, model_from(f), f.budget};
      return recavar::run_optimize(options, out, err);
    }
    if (*frontier) {
      recavar::FrontierCommandOptions options;
      options.scenarios = f.scenarios;
      options.levels = f.levels;
      if (!f.mu_grid.empty()) options.mu_grid = recavar::parse_mu_grid(f.mu_grid);
      options.model = model_from(f);
      options.out = optional_path(f.out);
      options.threads = f.threads;
      return recavar::run_frontier(options, out, err);
    }
    if (*case1) {
      recavar::Case1Options options{f.beta, f.r, f.ell, optional_path(f.out)};
      return recavar::run_case1(options, out, err);
    }
    if (*case2) {
      recavar::Case2Options options;
      options.m = f.m;
      options.seed = f.seed;
      options.ells = recavar::parse_real_list(f.ells);
      options.box_sizes = recavar::parse_real_list(f.box_sizes);
      if (!f.mu_grid.empty()) options.mu_grid = recavar::parse_mu_grid(f.mu_grid);
      if (!f.levels.empty()) options.levels = f.levels;
      options.out = optional_path(f.out);
      options.scenarios_out = optional_path(f.scenarios_out);
      options.threads = f.threads;
      return recavar::run_case2(options, out, err);
    }
    if (*verify) return recavar::run_verify(f.seed, f.trials, out, err);
  } catch (const recavar::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return recavar::kExitUsage;
  }
  return recavar::kExitUsage;
}
