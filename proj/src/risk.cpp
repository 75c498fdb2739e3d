#include "recavar/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace recavar {

namespace {

void require_level(double alpha, const char* who) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::domain_error(std::string(who) + ": level must lie in [0,1], got " +
                            std::to_string(alpha));
  }
}

// Outcome indices with positive mass, sorted by value ascending.
std::vector<std::size_t> ascending_support(const DiscreteVariable& x) {
  std::vector<std::size_t> order;
  order.reserve(x.size());
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x.probabilities()[s] > 0.0) order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x.values()[a] < x.values()[b];
  });
  return order;
}

}  // namespace

LevelFunction::LevelFunction(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw std::invalid_argument("level function needs at least one entry");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!(e.alpha >= 0.0 && e.alpha <= 1.0)) {
      throw std::invalid_argument("level function: alpha must lie in [0,1]");
    }
    if (!(e.threshold > 0.0 && e.threshold <= 1.0)) {
      throw std::invalid_argument("level function: thresholds must lie in (0,1]");
    }
    if (i > 0 && !(e.alpha > entries_[i - 1].alpha)) {
      throw std::invalid_argument("level function: alphas must be strictly increasing");
    }
    if (i > 0 && !(e.threshold > entries_[i - 1].threshold)) {
      throw std::invalid_argument("level function: thresholds must be strictly increasing");
    }
  }
  if (entries_.back().threshold != 1.0) {
    throw std::invalid_argument("level function: last threshold must equal 1");
  }
}

double LevelFunction::operator()(double lambda) const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::domain_error("lambda must lie in [0,1]");
  for (const auto& e : entries_) {
    if (lambda < e.threshold) return e.alpha;
  }
  return entries_.back().alpha;
}

void LevelFunction::require_positive_levels() const {
  for (const auto& e : entries_) {
    if (!(e.alpha > 0.0)) {
      throw std::domain_error("levels must be positive for the Psi/LP reduction (alpha = 0)");
    }
  }
}

DiscreteVariable::DiscreteVariable(std::vector<double> values, std::vector<double> probabilities)
    : values_(std::move(values)), probabilities_(std::move(probabilities)) {
  if (values_.size() != probabilities_.size()) {
    throw std::invalid_argument("discrete variable: values and probabilities differ in length");
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("discrete variable: values must be finite");
  }
  validate_probabilities(probabilities_, "discrete variable");
}

bool DiscreteVariable::same_outcomes(const DiscreteVariable& other) const {
  return probabilities_ == other.probabilities_;
}

DiscreteVariable DiscreteVariable::combine(double a, const DiscreteVariable& other, double b,
                                           double c) const {
  if (!same_outcomes(other)) {
    throw std::invalid_argument("discrete variables live on different outcome spaces");
  }
  std::vector<double> out(values_.size());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = a * values_[s] + b * other.values_[s] + c;
  return DiscreteVariable(std::move(out), probabilities_);
}

DiscreteVariable DiscreteVariable::shifted(double c) const {
  std::vector<double> out(values_);
  for (double& v : out) v += c;
  return DiscreteVariable(std::move(out), probabilities_);
}

DiscreteVariable DiscreteVariable::scaled(double a) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= a;
  return DiscreteVariable(std::move(out), probabilities_);
}

Portfolio::Portfolio(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("portfolio needs at least one weight");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("portfolio weights must be nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-10) throw std::invalid_argument("portfolio weights must sum to 1");
}

Portfolio Portfolio::from_solver(std::vector<double> weights) {
  double sum = 0.0;
  for (double& w : weights) {
    if (w < 0.0 && w > -1e-9) w = 0.0;
    sum += w;
  }
  if (std::abs(sum - 1.0) <= 1e-8 && sum > 0.0) {
    for (double& w : weights) w /= sum;
  }
  return Portfolio(std::move(weights));
}

DiscreteVariable position(const ScenarioSet& scen, std::span<const double> weights,
                          double recovery) {
  std::vector<double> values = scen.portfolio_returns(weights);
  for (std::size_t s = 0; s < values.size(); ++s) values[s] -= recovery * scen.liabilities()[s];
  return DiscreteVariable(std::move(values),
                          {scen.probabilities().begin(), scen.probabilities().end()});
}

DiscreteVariable liability_variable(const ScenarioSet& scen) {
  return DiscreteVariable({scen.liabilities().begin(), scen.liabilities().end()},
                          {scen.probabilities().begin(), scen.probabilities().end()});
}

double value_at_risk(const DiscreteVariable& x, double alpha) {
  require_level(alpha, "value_at_risk");
  const auto order = ascending_support(x);
  // The infimum is attained at -v for the smallest atom v with P(X <= v) > alpha.
  double cumulative = 0.0;
  for (std::size_t n = 0; n < order.size(); ++n) {
    const double v = x.values()[order[n]];
    cumulative += x.probabilities()[order[n]];
    const bool last_of_value = n + 1 == order.size() || x.values()[order[n + 1]] != v;
    if (last_of_value && cumulative > alpha) return -v;
  }
  return -x.values()[order.back()];
}

double average_value_at_risk(const DiscreteVariable& x, double alpha) {
  require_level(alpha, "average_value_at_risk");
  const auto order = ascending_support(x);
  if (alpha == 0.0) return -x.values()[order.front()];

  double remaining = alpha;
  double tail = 0.0;
  for (std::size_t idx : order) {
    const double take = std::min(x.probabilities()[idx], remaining);
    tail += take * x.values()[idx];
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  // Round-off when alpha is 1 and the masses sum to slightly less.
  if (remaining > 0.0) tail += remaining * x.values()[order.back()];
  return -tail / alpha;
}

RecAvarValue rec_avar(const DiscreteVariable& x, const DiscreteVariable& y,
                      const LevelFunction& gamma) {
  if (!x.same_outcomes(y)) {
    throw std::invalid_argument("rec_avar: X and Y must share the outcome space");
  }
  for (double v : y.values()) {
    if (v < 0.0) throw std::domain_error("rec_avar: Y must be nonnegative (Y >= 0 required)");
  }
  RecAvarValue best{0.0, 0};
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const double value =
        average_value_at_risk(x.combine(1.0, y, 1.0 - gamma[i].threshold), gamma[i].alpha);
    if (i == 0 || value > best.value) best = {value, i};
  }
  return best;
}

double psi(std::span<const double> position_values, std::span<const double> probabilities,
           double v, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("psi: alpha must lie in (0,1]");
  double expectation = 0.0;
  for (std::size_t s = 0; s < position_values.size(); ++s) {
    expectation += probabilities[s] * std::max(v - position_values[s], 0.0);
  }
  return expectation / alpha - v;
}

double psi(const Portfolio& x, double v, const ScenarioSet& scen, double alpha, double recovery) {
  const auto pos = position(scen, x.weights(), recovery);
  return psi(pos.values(), pos.probabilities(), v, alpha);
}

double recovery_probability(const ScenarioSet& scen, const Portfolio& x, double budget,
                            double capital, double lambda) {
  if (!(budget > 0.0)) throw std::domain_error("recovery_probability: budget must be positive");
  const auto returns = scen.portfolio_returns(x.weights());
  double probability = 0.0;
  for (std::size_t s = 0; s < scen.outcomes(); ++s) {
    double assets = 0.0;
    for (std::size_t k = 0; k < scen.assets(); ++k) assets += x[k];
    assets = budget * (assets + returns[s]) + capital;
    const double owed = lambda * budget * scen.liabilities()[s];
    // Round-off slack so that exact ties count as recovered.
    if (assets >= owed - 1e-12 * std::max(1.0, std::abs(owed))) {
      probability += scen.probabilities()[s];
    }
  }
  return std::min(probability, 1.0);
}

bool check_solvency(double available_capital, const DiscreteVariable& delta_net_assets,
                    const DiscreteVariable& liability_values, const LevelFunction& gamma) {
  return rec_avar(delta_net_assets, liability_values, gamma).value <= available_capital + 1e-12;
}

}  // namespace recavar
