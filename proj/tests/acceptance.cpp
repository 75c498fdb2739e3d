// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "recavar/commands.hpp"
#include "recavar/lp.hpp"
#include "recavar/optimize.hpp"
#include "recavar/risk.hpp"
#include "recavar/verify.hpp"

using namespace recavar;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("%s  %2d  %-28s %s (%.2fs)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(),
              seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const DiscreteVariable kTwoPoint({0.005, -0.04}, {0.999, 0.001});

void exact_avar() {
  Timer t;
  const double value = average_value_at_risk(kTwoPoint, 0.01);
  report(1, "exact AV@R", std::abs(value + 0.0005) <= 1e-12,
         fmt("AV@R_1%% = %.17g, expected -0.0005", value), t.seconds());
}

void avar_branches() {
  Timer t;
  double worst = 0.0;
  for (double beta : {0.0005, 0.001, 0.003, 0.005, 0.009}) {
    // 0.04 on (0, 0.1%]; above, (0.001 * 0.04 - (beta - 0.001) * 0.005) / beta.
    const double formula = beta <= 0.001 ? 0.04 : 0.000045 / beta - 0.005;
    worst = std::max(worst, std::abs(average_value_at_risk(kTwoPoint, beta) - formula));
  }
  report(2, "AV@R branch formula", worst <= 1e-12, fmt("max |exact - formula| = %.3g", worst),
         t.seconds());
}

void case_one_allocation() {
  Timer t;
  bool pass = true;
  double worst = 0.0;
  std::string detail;
  const auto solve = [](double beta, double ell) {
    const auto scen = exact_two_point_set(0.005, 0.999, -0.04, ell);
    const auto solved =
        solve_mean_risk(scen, LevelFunction({{beta, 0.99}, {0.01, 1.0}}), 0.0, NominalModel{});
    return solved.status == SolveStatus::optimal ? (*solved.weights)[1] : NAN;
  };
  for (double ell : {0.10, 0.20}) {
    const double lp = solve(0.005, ell);
    const double closed = case1_closed_form(0.005, 0.99, ell).x_star;
    worst = std::max(worst, std::abs(lp - closed));
    pass = pass && std::abs(lp - closed) <= 1e-6;
    pass = pass && std::round(lp * 10.0) / 10.0 == std::round(ell * 2.0 * 10.0) / 10.0;
    detail += fmt("x*(ell=%.0f%%) = %.9f; ", ell * 100.0, lp);
  }
  for (double beta : {0.009, 0.0095, 0.0099}) {
    const double lp = solve(beta, 0.10);
    worst = std::max(worst, std::abs(lp - 1.0));
    pass = pass && std::abs(lp - 1.0) <= 1e-6 && case1_closed_form(beta, 0.99, 0.10).x_star == 1.0;
  }
  detail += fmt("max |LP - closed form| = %.3g", worst);
  report(3, "two-point allocation", pass, detail, t.seconds());
}

void recovery_thresholds() {
  Timer t;
  const double ell = 0.10;
  const auto scen = exact_two_point_set(0.005, 0.999, -0.04, ell);
  const auto avar = solve_mean_risk(scen, LevelFunction::constant(0.01), 0.0, NominalModel{});
  const auto rec =
      solve_mean_risk(scen, LevelFunction({{0.005, 0.99}, {0.01, 1.0}}), 0.0, NominalModel{});
  if (avar.status != SolveStatus::optimal || rec.status != SolveStatus::optimal) {
    report(4, "recovery probabilities", false, "optimization failed", t.seconds());
    return;
  }
  // Capital b(risk - 1) with b = 1; the bad state keeps 1 + x R2_down + capital.
  const double avar_threshold = 1.0 - 0.0405 / ell;
  const double x = 0.001 / 0.0045;
  const double rec_capital = std::max(x * 0.004 + 0.099, x * -0.0005 + 0.1) - 1.0;
  const double rec_threshold = (1.0 - 0.04 * x + rec_capital) / ell;

  bool pass = rec_threshold >= 0.9;
  const auto step = [&](const OptimalPortfolio& solved, double threshold) {
    const double capital = solved.risk - 1.0;
    bool ok = true;
    for (int k = 1; k < 1000; ++k) {
      const double lambda = k / 1000.0;
      if (std::abs(lambda - threshold) < 1e-6) continue;
      const double expected = lambda < threshold ? 1.0 : 0.999;
      ok = ok && recovery_probability(scen, *solved.weights, 1.0, capital, lambda) == expected;
    }
    ok = ok && recovery_probability(scen, *solved.weights, 1.0, capital, threshold - 1e-6) == 1.0;
    ok = ok && recovery_probability(scen, *solved.weights, 1.0, capital, threshold + 1e-6) == 0.999;
    return ok;
  };
  pass = pass && step(avar, avar_threshold) && step(rec, rec_threshold);
  report(4, "recovery probabilities", pass,
         fmt("AV@R full recovery up to %.6g, RecAV@R up to %.6g (>= 0.9)", avar_threshold,
             rec_threshold),
         t.seconds());
}

void minimax_theorems() {
  Timer t;
  const auto batch = minimax_batch(2024, 200);
  std::mt19937_64 rng(515);
  std::uniform_int_distribution<int> outcomes(5, 20), levels(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto random_gamma = [&] {
    const int n = levels(rng);
    std::vector<LevelFunction::Entry> entries;
    for (int i = 0; i < n; ++i) {
      entries.push_back({0.02 + 0.08 * i + 0.05 * unit(rng), (i + 1.0) / n - (i + 1 < n ? 0.1 * unit(rng) : 0.0)});
    }
    return LevelFunction(entries);
  };
  double mixture_gap = 0.0, box_gap = 0.0;
  bool below = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = static_cast<std::size_t>(outcomes(rng));
    const auto scen = oracle::random_set(rng, m, 2);
    const auto gamma = random_gamma();
    std::vector<std::vector<double>> vectors;
    for (int j = 0; j < 3; ++j) vectors.push_back(oracle::random_probabilities(rng, m));
    const auto solved = solve_mean_risk(scen, gamma, -1.0, MixtureModel{vectors});
    if (solved.status != SolveStatus::optimal) {
      below = false;
      continue;
    }
    double best = INFINITY;
    for (int k = 0; k <= 1000; ++k) {
      const std::vector<double> w{k / 1000.0, 1.0 - k / 1000.0};
      best = std::min(best, oracle::hull_risk(scen, gamma, w, vectors));
    }
    below = below && solved.risk <= best + 1e-9;
    mixture_gap = std::max(mixture_gap, std::abs(best - solved.risk));
  }
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = static_cast<std::size_t>(outcomes(rng));
    const auto scen = oracle::random_set(rng, m, 2, trial % 2 == 0);
    const auto gamma = random_gamma();
    const double smallest = *std::min_element(scen.probabilities().begin(), scen.probabilities().end());
    const double c = 0.9 * unit(rng) * smallest;
    const std::vector<double> lower(m, -c), upper(m, c);
    const auto solved = solve_mean_risk(scen, gamma, -1.0, BoxModel{lower, upper});
    if (solved.status != SolveStatus::optimal) {
      below = false;
      continue;
    }
    double best = INFINITY;
    for (int k = 0; k <= 1000; ++k) {
      const std::vector<double> w{k / 1000.0, 1.0 - k / 1000.0};
      best = std::min(best, oracle::box_risk(scen, gamma, w, lower, upper));
    }
    below = below && solved.risk <= best + 1e-9;
    box_gap = std::max(box_gap, std::abs(best - solved.risk));
  }
  const bool pass = batch.worst_gap <= 1e-7 && mixture_gap <= 2e-3 && box_gap <= 2e-3 && below;
  report(5, "minimax theorems", pass,
         fmt("nominal gap %.3g over 200; mixture grid gap %.3g, box grid gap %.3g over 50 each",
             batch.worst_gap, mixture_gap, box_gap),
         t.seconds());
}

void appendix() {
  Timer t;
  const auto values = appendix_counterexample();
  report(6, "appendix counterexample", values.max_min == 0.0 && values.min_max_shared == 1.0,
         fmt("(max-min, min-max) = (%.17g, %.17g)", values.max_min, values.min_max_shared),
         t.seconds());
}

void reductions() {
  Timer t;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> outcomes(5, 40), assets(1, 3);
  const LevelFunction gamma({{0.05, 0.5}, {0.1, 0.9}, {0.25, 1.0}});
  double worst = 0.0;
  bool statuses = true;
  for (int model = 0; model < 2; ++model) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t m = static_cast<std::size_t>(outcomes(rng));
      const auto scen = oracle::random_set(rng, m, static_cast<std::size_t>(assets(rng)));
      const double mu = scen.mean_returns()[0] - 0.001;
      const auto nominal = solve_mean_risk(scen, gamma, mu, NominalModel{});
      const UncertaintyModel other =
          model == 0 ? UncertaintyModel{BoxModel::symmetric(m, 0.0)}
                     : UncertaintyModel{MixtureModel{{{scen.probabilities().begin(), scen.probabilities().end()}}}};
      const auto reduced = solve_mean_risk(scen, gamma, mu, other);
      statuses = statuses && nominal.status == reduced.status && nominal.status == SolveStatus::optimal;
      if (nominal.status == SolveStatus::optimal && reduced.status == SolveStatus::optimal) {
        worst = std::max(worst, std::abs(nominal.risk - reduced.risk));
      }
    }
  }
  report(7, "reductions to nominal", statuses && worst <= 1e-9,
         fmt("max |difference| = %.3g over 40 instances", worst), t.seconds());
}

void inner_max_duality() {
  Timer t;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> value(-1.0, 1.0), width(0.0, 0.2);
  double worst = 0.0;
  bool solved_all = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = static_cast<std::size_t>(size(rng));
    std::vector<double> u(m), lower(m), upper(m);
    LinearProgram lp;
    std::vector<Term> sum;
    for (std::size_t j = 0; j < m; ++j) {
      u[j] = value(rng);
      lower[j] = -width(rng);
      upper[j] = width(rng);
      lp.add_variable(-u[j], lower[j], upper[j]);
      sum.push_back({j, 1.0});
    }
    lp.add_constraint(sum, Relation::equal, 0.0);
    const auto primal = solve_lp(lp);
    if (primal.status != LpStatus::optimal) {
      solved_all = false;
      continue;
    }
    worst = std::max(worst, std::abs(worst_case_inner_value(u, lower, upper) + primal.objective_value));
  }
  report(8, "inner-max duality", solved_all && worst <= 1e-10,
         fmt("max |dual - primal LP| = %.3g over 100 instances", worst), t.seconds());
}

void coherence() {
  Timer t;
  const auto suite = property_suite(1, 1000);
  double worst = 0.0;
  for (const auto& p : suite.properties) worst = std::max(worst, p.worst_violation);
  report(9, "coherence suite", suite.all_passed(),
         fmt("%.0f properties x 1000 trials, worst violation %.3g",
             static_cast<double>(suite.properties.size()), worst),
         t.seconds());
}

void case_two() {
  Timer t;
  const auto result = compute_case2(Case2Options{});
  const double seconds = t.seconds();
  std::size_t optimal = 0;
  for (const auto& row : result.rows) optimal += row.status == SolveStatus::optimal ? 1 : 0;
  const bool pass = result.monotone_in_mu && result.monotone_in_box && result.dominance_in_ell &&
                    result.ratio_points > 0 && result.min_ratio >= 1.5 && result.max_ratio <= 6.0 &&
                    seconds < 300.0;
  report(10, "sampled frontier (m=5000)", pass,
         fmt("%.0f optimal points, risk ratio %.3f to %.3f", static_cast<double>(optimal),
             result.min_ratio, result.max_ratio) +
             (result.monotone_in_mu ? "" : ", NOT monotone in mu") +
             (result.monotone_in_box ? "" : ", NOT monotone in C") +
             (result.dominance_in_ell ? "" : ", ell=50% does NOT dominate"),
         seconds);
}

void determinism() {
  Timer t;
  std::ostringstream first, second, err;
  const int a = run_case2(Case2Options{}, first, err);
  const int b = run_case2(Case2Options{}, second, err);
  const bool pass = a == kExitOk && b == kExitOk && !first.str().empty() && first.str() == second.str();
  report(11, "determinism", pass,
         fmt("two runs, %.0f and %.0f bytes", static_cast<double>(first.str().size()),
             static_cast<double>(second.str().size())) +
             (first.str() == second.str() ? ", identical" : ", DIFFERENT"),
         t.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  // With an argument, runs only that criterion.
  void (*const criteria[])() = {exact_avar,  avar_branches,     case_one_allocation, recovery_thresholds,
                                minimax_theorems, appendix, reductions, inner_max_duality,
                                coherence,   case_two,          determinism};
  constexpr int count = static_cast<int>(std::size(criteria));
  if (argc > 1) {
    const int id = std::atoi(argv[1]);
    if (id < 1 || id > count) {
      std::fprintf(stderr, "criterion must be 1..%d\n", count);
      return 2;
    }
    criteria[id - 1]();
    return failures == 0 ? 0 : 1;
  }
  for (auto criterion : criteria) criterion();
  std::printf("%d of %d criteria failed\n", failures, count);
  return failures == 0 ? 0 : 1;
}
