#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "recavar/optimize.hpp"

namespace recavar {

namespace {

void require_nonempty_box(std::span<const double> u, std::span<const double> lower,
                          std::span<const double> upper) {
  if (lower.size() != u.size() || upper.size() != u.size()) {
    throw std::invalid_argument("box bounds must match the number of outcomes");
  }
  double low_sum = 0.0;
  double high_sum = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !std::isfinite(u[j])) {
      throw std::domain_error("box bounds and values must be finite");
    }
    if (lower[j] > upper[j]) throw std::domain_error("box lower bound exceeds upper bound");
    low_sum += lower[j];
    high_sum += upper[j];
  }
  if (low_sum > 1e-12 || high_sum < -1e-12) {
    throw std::domain_error("box admits no perturbation summing to zero");
  }
}

}  // namespace

BoxModel BoxModel::symmetric(std::size_t outcomes, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw std::domain_error("box size must be >= 0");
  return {std::vector<double>(outcomes, -c), std::vector<double>(outcomes, c)};
}

double worst_case_inner_value(std::span<const double> u, std::span<const double> lower,
                              std::span<const double> upper) {
  require_nonempty_box(u, lower, upper);
  const std::size_t m = u.size();
  if (m == 0) return 0.0;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });

  // D(z) is convex piecewise linear with kinks at the u_j, so the minimum
  // sits on one of them. Below/above sums make each evaluation O(1).
  double below_lower = 0.0;    // sum lower_j over u_j < z
  double below_lower_u = 0.0;  // sum lower_j u_j over u_j < z
  double above_upper = 0.0;
  double above_upper_u = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    above_upper += upper[j];
    above_upper_u += upper[j] * u[j];
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t j = order[t];
    const double z = u[j];
    above_upper -= upper[j];
    above_upper_u -= upper[j] * u[j];
    const double value = (above_upper_u - above_upper * z) - (below_lower * z - below_lower_u);
    best = std::min(best, value);
    below_lower += lower[j];
    below_lower_u += lower[j] * u[j];
  }
  return best;
}

std::vector<double> worst_case_perturbation(std::span<const double> u,
                                            std::span<const double> lower,
                                            std::span<const double> upper) {
  require_nonempty_box(u, lower, upper);
  const std::size_t m = u.size();
  std::vector<double> eps(lower.begin(), lower.end());
  double budget = -std::accumulate(lower.begin(), lower.end(), 0.0);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] > u[b]; });
  for (std::size_t j : order) {
    if (budget <= 0.0) break;
    const double step = std::min(upper[j] - lower[j], budget);
    eps[j] += step;
    budget -= step;
  }
  return eps;
}

LinearProgram build_box_lp(const ScenarioSet& scen, std::span<const double> lower,
                           std::span<const double> upper, const LevelFunction& gamma, double mu) {
  gamma.require_positive_levels();
  validate_model(scen, BoxModel{{lower.begin(), lower.end()}, {upper.begin(), upper.end()}});
  const std::size_t m = scen.outcomes();
  const std::size_t K = scen.assets();
  const std::size_t levels = gamma.size();
  const auto pi = scen.probabilities();

  LinearProgram lp;
  lp.add_variable(1.0, -kInfinity, kInfinity);
  for (std::size_t i = 0; i < levels; ++i) lp.add_variable(0.0, -kInfinity, kInfinity);
  for (std::size_t k = 0; k < K; ++k) lp.add_variable(0.0);

  for (std::size_t i = 0; i < levels; ++i) {
    const double alpha = gamma[i].alpha;
    const double r = gamma[i].threshold;
    const std::size_t v = level_variable(i);
    const std::size_t z = lp.add_variable(0.0, -kInfinity, kInfinity);
    std::vector<Term> risk_row{{kRiskVariable, -1.0}, {v, -1.0}};
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t uj = lp.add_variable(0.0);
      const std::size_t sigma = lp.add_variable(0.0);
      const std::size_t tau = lp.add_variable(0.0, -kInfinity, 0.0);
      if (pi[j] != 0.0) risk_row.push_back({uj, pi[j] / alpha});
      if (upper[j] != 0.0) risk_row.push_back({sigma, upper[j] / alpha});
      if (lower[j] != 0.0) risk_row.push_back({tau, lower[j] / alpha});

      std::vector<Term> shortfall{{uj, 1.0}, {v, -1.0}};
      for (std::size_t k = 0; k < K; ++k) {
        const double a = scen.asset_return(j, k);
        if (a != 0.0) shortfall.push_back({weight_variable(levels, k), a});
      }
      lp.add_constraint(std::move(shortfall), Relation::greater_equal, r * scen.liabilities()[j]);
      lp.add_constraint({{uj, 1.0}, {z, -1.0}, {sigma, -1.0}, {tau, -1.0}}, Relation::equal, 0.0);
    }
    lp.add_constraint(std::move(risk_row), Relation::less_equal, 0.0);
  }

  const std::size_t w = lp.add_variable(0.0, -kInfinity, kInfinity);
  std::vector<Term> return_row;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t zeta = lp.add_variable(0.0, -kInfinity, 0.0);
    const std::size_t eta = lp.add_variable(0.0);
    if (upper[j] != 0.0) return_row.push_back({zeta, upper[j]});
    if (lower[j] != 0.0) return_row.push_back({eta, lower[j]});
    std::vector<Term> split{{w, 1.0}, {zeta, 1.0}, {eta, 1.0}};
    for (std::size_t k = 0; k < K; ++k) {
      const double a = scen.asset_return(j, k);
      if (a != 0.0) split.push_back({weight_variable(levels, k), -a});
    }
    lp.add_constraint(std::move(split), Relation::equal, 0.0);
  }
  const auto means = scen.mean_returns();
  for (std::size_t k = 0; k < K; ++k) return_row.push_back({weight_variable(levels, k), means[k]});
  lp.add_constraint(std::move(return_row), Relation::greater_equal, mu);

  std::vector<Term> simplex;
  for (std::size_t k = 0; k < K; ++k) simplex.push_back({weight_variable(levels, k), 1.0});
  lp.add_constraint(std::move(simplex), Relation::equal, 1.0);
  return lp;
}

}  // namespace recavar
