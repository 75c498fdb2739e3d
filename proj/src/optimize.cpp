#include "recavar/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "cutting_plane.hpp"
#include "recavar/errors.hpp"

namespace recavar {

namespace {

void add_weight_variables(LinearProgram& lp, const ScenarioSet& scen, std::size_t levels) {
  lp.add_variable(1.0, -kInfinity, kInfinity);
  for (std::size_t i = 0; i < levels; ++i) lp.add_variable(0.0, -kInfinity, kInfinity);
  for (std::size_t k = 0; k < scen.assets(); ++k) lp.add_variable(0.0);
}

void add_simplex_row(LinearProgram& lp, const ScenarioSet& scen, std::size_t levels) {
  std::vector<Term> row;
  for (std::size_t k = 0; k < scen.assets(); ++k) row.push_back({weight_variable(levels, k), 1.0});
  lp.add_constraint(std::move(row), Relation::equal, 1.0);
}

void add_return_row(LinearProgram& lp, const ScenarioSet& scen, std::size_t levels,
                    std::span<const double> probabilities, double mu) {
  const auto means = scen.mean_returns(probabilities);
  std::vector<Term> row;
  for (std::size_t k = 0; k < scen.assets(); ++k) {
    row.push_back({weight_variable(levels, k), means[k]});
  }
  lp.add_constraint(std::move(row), Relation::greater_equal, mu);
}

// The estimated dense tableau size for the extended LP.
double tableau_cells(const LinearProgram& lp) {
  double rows = static_cast<double>(lp.constraints());
  double cols = static_cast<double>(lp.variables());
  for (const auto& b : lp.bounds()) {
    if (std::isfinite(b.lower) && std::isfinite(b.upper)) rows += 1.0;
    if (!std::isfinite(b.lower) && !std::isfinite(b.upper)) cols += 1.0;
  }
  return rows * (cols + 2.0 * rows);
}

LinearProgram build_measures_lp(const ScenarioSet& scen,
                                const std::vector<std::vector<double>>& measures,
                                const LevelFunction& gamma, double mu) {
  gamma.require_positive_levels();
  const std::size_t m = scen.outcomes();
  const std::size_t K = scen.assets();
  const std::size_t levels = gamma.size();
  std::vector<bool> charged(m, false);
  for (const auto& q : measures) {
    for (std::size_t s = 0; s < m; ++s) charged[s] = charged[s] || q[s] > 0.0;
  }

  LinearProgram lp;
  add_weight_variables(lp, scen, levels);
  for (std::size_t i = 0; i < levels; ++i) {
    const double alpha = gamma[i].alpha;
    const double r = gamma[i].threshold;
    const std::size_t v = level_variable(i);
    std::vector<std::size_t> u(m, 0);
    for (std::size_t s = 0; s < m; ++s) {
      if (!charged[s]) continue;
      u[s] = lp.add_variable(0.0);
      std::vector<Term> row{{u[s], 1.0}, {v, -1.0}};
      for (std::size_t k = 0; k < K; ++k) {
        const double a = scen.asset_return(s, k);
        if (a != 0.0) row.push_back({weight_variable(levels, k), a});
      }
      lp.add_constraint(std::move(row), Relation::greater_equal, r * scen.liabilities()[s]);
    }
    for (const auto& q : measures) {
      std::vector<Term> row{{kRiskVariable, -1.0}, {v, -1.0}};
      for (std::size_t s = 0; s < m; ++s) {
        if (q[s] > 0.0) row.push_back({u[s], q[s] / alpha});
      }
      lp.add_constraint(std::move(row), Relation::less_equal, 0.0);
    }
  }
  for (const auto& q : measures) add_return_row(lp, scen, levels, q, mu);
  add_simplex_row(lp, scen, levels);
  return lp;
}

OptimalPortfolio from_extended_solution(const LpSolution& sol, std::size_t levels,
                                        std::size_t assets) {
  OptimalPortfolio result;
  switch (sol.status) {
    case LpStatus::infeasible:
      result.status = SolveStatus::infeasible;
      return result;
    case LpStatus::unbounded:
      result.status = SolveStatus::unbounded;
      return result;
    case LpStatus::optimal:
      break;
  }
  result.status = SolveStatus::optimal;
  result.risk = sol.x[kRiskVariable];
  for (std::size_t i = 0; i < levels; ++i) result.v_star.push_back(sol.x[level_variable(i)]);
  std::vector<double> weights(sol.x.begin() + static_cast<std::ptrdiff_t>(weight_variable(levels, 0)),
                              sol.x.begin() +
                                  static_cast<std::ptrdiff_t>(weight_variable(levels, assets)));
  result.weights = Portfolio::from_solver(std::move(weights));
  return result;
}

}  // namespace

void validate_model(const ScenarioSet& scen, const UncertaintyModel& model) {
  const std::size_t m = scen.outcomes();
  if (const auto* mix = std::get_if<MixtureModel>(&model)) {
    if (mix->probability_vectors.empty()) {
      throw std::invalid_argument("mixture needs at least one probability vector");
    }
    for (const auto& q : mix->probability_vectors) {
      if (q.size() != m) {
        throw std::invalid_argument("mixture vector length differs from the number of outcomes");
      }
      validate_probabilities(q, "mixture vector");
    }
  } else if (const auto* box = std::get_if<BoxModel>(&model)) {
    if (box->lower.size() != m || box->upper.size() != m) {
      throw std::domain_error("box bounds must have one entry per outcome");
    }
    const auto pi = scen.probabilities();
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(box->lower[j]) || !std::isfinite(box->upper[j])) {
        throw std::domain_error("box bounds must be finite");
      }
      if (!(box->lower[j] <= 0.0 && 0.0 <= box->upper[j])) {
        throw std::domain_error("box must contain the zero perturbation");
      }
      if (pi[j] + box->lower[j] < -1e-15) {
        throw std::domain_error("box lower bound would make a probability negative");
      }
    }
  }
}

LinearProgram build_nominal_lp(const ScenarioSet& scen, const LevelFunction& gamma, double mu) {
  return build_measures_lp(
      scen, {std::vector<double>(scen.probabilities().begin(), scen.probabilities().end())}, gamma,
      mu);
}

LinearProgram build_mixture_lp(const ScenarioSet& scen,
                               const std::vector<std::vector<double>>& vectors,
                               const LevelFunction& gamma, double mu) {
  validate_model(scen, MixtureModel{vectors});
  return build_measures_lp(scen, vectors, gamma, mu);
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::failed:
      return "failed";
  }
  return "unknown";
}

OptimalPortfolio solve_mean_risk(const ScenarioSet& scen, const LevelFunction& gamma, double mu,
                                 const UncertaintyModel& model, const SolveOptions& options) {
  gamma.require_positive_levels();
  validate_model(scen, model);
  if (!std::isfinite(mu)) throw std::invalid_argument("target return must be finite");

  OptimalPortfolio result;
  bool use_lp = options.method == SolveMethod::extended_lp;
  std::optional<LinearProgram> lp;
  if (options.method != SolveMethod::cutting_plane) {
    if (std::holds_alternative<NominalModel>(model)) {
      lp = build_nominal_lp(scen, gamma, mu);
    } else if (const auto* mix = std::get_if<MixtureModel>(&model)) {
      lp = build_mixture_lp(scen, mix->probability_vectors, gamma, mu);
    } else {
      const auto& box = std::get<BoxModel>(model);
      lp = build_box_lp(scen, box.lower, box.upper, gamma, mu);
    }
    if (options.method == SolveMethod::automatic) {
      use_lp = tableau_cells(*lp) <= options.max_tableau_cells;
    }
  }

  try {
    if (use_lp) {
      result = from_extended_solution(solve_lp(*lp), gamma.size(), scen.assets());
    } else {
      const detail::MeasureOracle oracle(scen, model);
      result = detail::solve_with_cutting_planes(scen, gamma, mu, oracle, options);
    }
  } catch (const SolverError& e) {
    result = OptimalPortfolio{};
    result.status = SolveStatus::failed;
    result.message = e.what();
    return result;
  }

  if (result.status == SolveStatus::optimal && std::holds_alternative<NominalModel>(model)) {
    double direct = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      direct = std::max(direct, average_value_at_risk(
                                    position(scen, result.weights->weights(), gamma[i].threshold),
                                    gamma[i].alpha));
    }
    if (std::abs(direct - result.risk) > 1e-6) {
      result.status = SolveStatus::failed;
      result.message = "optimal value disagrees with direct evaluation at the weights";
    }
  }
  return result;
}

double worst_case_mean(const ScenarioSet& scen, const UncertaintyModel& model,
                       std::span<const double> weights) {
  const detail::MeasureOracle oracle(scen, model);
  const auto returns = scen.portfolio_returns(weights);
  const auto q = oracle.minimizing(returns);
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) sum += q[j] * returns[j];
  return sum;
}

MuRange feasible_mu_range(const ScenarioSet& scen, const UncertaintyModel& model) {
  const detail::MeasureOracle oracle(scen, model);
  const auto best = detail::max_worst_case_mean(scen, oracle, SolveOptions{});
  double low = std::numeric_limits<double>::infinity();
  std::vector<double> unit(scen.assets(), 0.0);
  for (std::size_t k = 0; k < scen.assets(); ++k) {
    unit[k] = 1.0;
    low = std::min(low, worst_case_mean(scen, model, unit));
    unit[k] = 0.0;
  }
  return {std::min(low, best.value), best.value};
}

std::vector<FrontierPoint> efficient_frontier(const ScenarioSet& scen, const LevelFunction& gamma,
                                              const UncertaintyModel& model,
                                              std::span<const double> mu_grid,
                                              const FrontierOptions& options) {
  for (double mu : mu_grid) {
    if (!std::isfinite(mu)) throw std::invalid_argument("mu grid must be finite");
  }
  gamma.require_positive_levels();
  validate_model(scen, model);

  std::vector<FrontierPoint> points(mu_grid.size());
  auto solve_point = [&](std::size_t index) {
    FrontierPoint& point = points[index];
    point.mu = mu_grid[index];
    try {
      auto solved = solve_mean_risk(scen, gamma, point.mu, model, options.solve);
      point.status = solved.status;
      point.risk = solved.risk;
      point.weights = std::move(solved.weights);
    } catch (const std::exception&) {
      point.status = SolveStatus::failed;
      point.risk = 0.0;
    }
  };

  const std::size_t threads = std::min(std::max<std::size_t>(options.threads, 1), points.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) solve_point(i);
    return points;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < points.size(); i = next++) solve_point(i);
    });
  }
  for (auto& thread : pool) thread.join();
  return points;
}

}  // namespace recavar
