#include "cutting_plane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "recavar/errors.hpp"

namespace recavar::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

// sum_j q_j R^k_j for every asset k.
std::vector<double> weighted_returns(const ScenarioSet& scen, std::span<const double> q) {
  std::vector<double> out(scen.assets(), 0.0);
  for (std::size_t j = 0; j < scen.outcomes(); ++j) {
    if (q[j] == 0.0) continue;
    const auto row = scen.returns_row(j);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += q[j] * row[k];
  }
  return out;
}

std::vector<double> simplex_weights(const LpSolution& sol, std::size_t first, std::size_t count) {
  return {sol.x.begin() + static_cast<std::ptrdiff_t>(first),
          sol.x.begin() + static_cast<std::ptrdiff_t>(first + count)};
}

}  // namespace

MeasureOracle::MeasureOracle(const ScenarioSet& scen, const UncertaintyModel& model)
    : benchmark_(scen.probabilities().begin(), scen.probabilities().end()) {
  validate_model(scen, model);
  if (std::holds_alternative<NominalModel>(model)) {
    vertices_.push_back(benchmark_);
  } else if (const auto* mix = std::get_if<MixtureModel>(&model)) {
    vertices_ = mix->probability_vectors;
  } else {
    const auto& box = std::get<BoxModel>(model);
    lower_ = box.lower;
    upper_ = box.upper;
  }
}

std::vector<double> MeasureOracle::maximizing(std::span<const double> values) const {
  if (finite()) {
    std::size_t best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < vertices_.size(); ++j) {
      const double value = dot(vertices_[j], values);
      if (value > best_value) {
        best_value = value;
        best = j;
      }
    }
    return vertices_[best];
  }
  auto q = worst_case_perturbation(values, lower_, upper_);
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = std::max(q[j] + benchmark_[j], 0.0);
  return q;
}

std::vector<double> MeasureOracle::minimizing(std::span<const double> values) const {
  std::vector<double> negated(values.begin(), values.end());
  for (double& v : negated) v = -v;
  return maximizing(negated);
}

OptimalPortfolio solve_with_cutting_planes(const ScenarioSet& scen, const LevelFunction& gamma,
                                           double mu, const MeasureOracle& oracle,
                                           const SolveOptions& options) {
  gamma.require_positive_levels();
  const std::size_t m = scen.outcomes();
  const std::size_t K = scen.assets();
  const std::size_t levels = gamma.size();

  double low_return = std::numeric_limits<double>::infinity();
  double high_return = -low_return;
  std::vector<double> row_min(m), row_max(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = scen.returns_row(j);
    row_min[j] = *std::min_element(row.begin(), row.end());
    row_max[j] = *std::max_element(row.begin(), row.end());
  }

  LinearProgram master;
  master.add_variable(1.0, -kInfinity, kInfinity);
  for (std::size_t i = 0; i < levels; ++i) {
    const double r = gamma[i].threshold;
    low_return = std::numeric_limits<double>::infinity();
    high_return = -low_return;
    for (std::size_t j = 0; j < m; ++j) {
      low_return = std::min(low_return, row_min[j] - r * scen.liabilities()[j]);
      high_return = std::max(high_return, row_max[j] - r * scen.liabilities()[j]);
    }
    master.add_variable(0.0, low_return, high_return);
  }
  for (std::size_t k = 0; k < K; ++k) master.add_variable(0.0);

  std::vector<Term> simplex;
  for (std::size_t k = 0; k < K; ++k) simplex.push_back({weight_variable(levels, k), 1.0});
  master.add_constraint(std::move(simplex), Relation::equal, 1.0);
  for (std::size_t i = 0; i < levels; ++i) {
    master.add_constraint({{kRiskVariable, -1.0}, {level_variable(i), -1.0}}, Relation::less_equal,
                          0.0);
  }

  auto add_return_cut = [&](std::span<const double> q) {
    const auto means = weighted_returns(scen, q);
    std::vector<Term> row;
    for (std::size_t k = 0; k < K; ++k) row.push_back({weight_variable(levels, k), means[k]});
    master.add_constraint(std::move(row), Relation::greater_equal, mu);
  };
  if (oracle.finite()) {
    for (const auto& q : oracle.vertices()) add_return_cut(q);
  } else {
    add_return_cut(oracle.benchmark());
  }

  std::vector<double> position(m), shortfall(m);
  OptimalPortfolio result;
  for (std::size_t round = 0; round < options.max_cut_rounds; ++round) {
    const LpSolution sol = solve_lp(master);
    if (sol.status == LpStatus::infeasible) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    if (sol.status == LpStatus::unbounded) {
      throw SolverError("cutting-plane master problem is unbounded");
    }
    const double t_bar = sol.x[kRiskVariable];
    const auto weights = simplex_weights(sol, weight_variable(levels, 0), K);
    for (std::size_t j = 0; j < m; ++j) position[j] = dot(scen.returns_row(j), weights);

    bool added = false;
    double worst = -std::numeric_limits<double>::infinity();
    const double tolerance = options.cut_tolerance * std::max(1.0, std::abs(t_bar));
    for (std::size_t i = 0; i < levels; ++i) {
      const double alpha = gamma[i].alpha;
      const double r = gamma[i].threshold;
      const double v = sol.x[level_variable(i)];
      for (std::size_t j = 0; j < m; ++j) {
        shortfall[j] = std::max(v - position[j] + r * scen.liabilities()[j], 0.0);
      }
      const auto q = oracle.maximizing(shortfall);
      const double value = dot(q, shortfall) / alpha - v;
      worst = std::max(worst, value);
      if (value <= t_bar + tolerance) continue;

      // (1/alpha) sum_{j in S} q_j (v - sum_k x^k R^k_j + r Z_j) - v <= T
      double mass = 0.0;
      double rhs = 0.0;
      std::vector<double> asset_coef(K, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        if (shortfall[j] <= 0.0 || q[j] == 0.0) continue;
        mass += q[j];
        rhs -= q[j] * r * scen.liabilities()[j];
        const auto row = scen.returns_row(j);
        for (std::size_t k = 0; k < K; ++k) asset_coef[k] -= q[j] * row[k];
      }
      std::vector<Term> cut{{kRiskVariable, -1.0}, {level_variable(i), mass / alpha - 1.0}};
      for (std::size_t k = 0; k < K; ++k) {
        cut.push_back({weight_variable(levels, k), asset_coef[k] / alpha});
      }
      master.add_constraint(std::move(cut), Relation::less_equal, rhs / alpha);
      added = true;
    }

    if (!oracle.finite()) {
      const auto q = oracle.minimizing(position);
      if (dot(q, position) < mu - 1e-10 * std::max(1.0, std::abs(mu))) {
        add_return_cut(q);
        added = true;
      }
    }

    if (!added) {
      result.status = SolveStatus::optimal;
      result.weights = Portfolio::from_solver(weights);
      result.risk = worst;
      for (std::size_t i = 0; i < levels; ++i) result.v_star.push_back(sol.x[level_variable(i)]);
      return result;
    }
  }
  result.status = SolveStatus::failed;
  result.message = "cutting planes did not converge in " +
                   std::to_string(options.max_cut_rounds) + " rounds";
  return result;
}

BestMean max_worst_case_mean(const ScenarioSet& scen, const MeasureOracle& oracle,
                             const SolveOptions& options) {
  const std::size_t K = scen.assets();
  const auto returns = scen.returns();
  const double low = *std::min_element(returns.begin(), returns.end());
  const double high = *std::max_element(returns.begin(), returns.end());

  // max t subject to t <= sum_k x^k E_q[R^k] for the measures seen so far.
  LinearProgram master;
  master.add_variable(-1.0, low, high);
  for (std::size_t k = 0; k < K; ++k) master.add_variable(0.0);
  std::vector<Term> simplex;
  for (std::size_t k = 0; k < K; ++k) simplex.push_back({1 + k, 1.0});
  master.add_constraint(std::move(simplex), Relation::equal, 1.0);

  auto add_cut = [&](std::span<const double> q) {
    const auto means = weighted_returns(scen, q);
    std::vector<Term> row{{0, 1.0}};
    for (std::size_t k = 0; k < K; ++k) row.push_back({1 + k, -means[k]});
    master.add_constraint(std::move(row), Relation::less_equal, 0.0);
  };
  if (oracle.finite()) {
    for (const auto& q : oracle.vertices()) add_cut(q);
  } else {
    add_cut(oracle.benchmark());
  }

  std::vector<double> position(scen.outcomes());
  for (std::size_t round = 0; round < options.max_cut_rounds; ++round) {
    const LpSolution sol = solve_lp(master);
    if (sol.status != LpStatus::optimal) {
      throw SolverError("worst-case mean master problem is not optimal");
    }
    auto weights = simplex_weights(sol, 1, K);
    for (std::size_t j = 0; j < position.size(); ++j) {
      position[j] = dot(scen.returns_row(j), weights);
    }
    const auto q = oracle.minimizing(position);
    const double value = dot(q, position);
    if (oracle.finite() || value >= sol.x[0] - 1e-12 * std::max(1.0, std::abs(value))) {
      return {std::min(value, sol.x[0]), std::move(weights)};
    }
    add_cut(q);
  }
  throw SolverError("worst-case mean cutting planes did not converge");
}

}  // namespace recavar::detail
