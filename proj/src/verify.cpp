#include "recavar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "recavar/errors.hpp"
#include "recavar/lp.hpp"

namespace recavar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
  double value;
  double cumulative;  // P(X <= value)
};

// Distinct values ascending with the distribution function at each.
std::vector<Atom> distribution(std::span<const double> values, std::span<const double> probs) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (probs[s] > 0.0) pairs.emplace_back(values[s], probs[s]);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<Atom> atoms;
  double cumulative = 0.0;
  for (const auto& [value, p] : pairs) {
    cumulative += p;
    if (!atoms.empty() && atoms.back().value == value) {
      atoms.back().cumulative = cumulative;
    } else {
      atoms.push_back({value, cumulative});
    }
  }
  return atoms;
}

// Smallest atom with F > level, else the largest.
double upper_quantile(const std::vector<Atom>& atoms, double level) {
  for (const auto& a : atoms) {
    if (a.cumulative > level) return a.value;
  }
  return atoms.back().value;
}

// Smallest atom with F >= level, else the largest.
double lower_quantile(const std::vector<Atom>& atoms, double level) {
  for (const auto& a : atoms) {
    if (a.cumulative >= level) return a.value;
  }
  return atoms.back().value;
}

double shortfall_objective(std::span<const double> values, std::span<const double> probs, double v,
                           double alpha) {
  double sum = 0.0;
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double gap = v - values[s];
    if (gap > 0.0) sum += probs[s] * gap;
  }
  return sum / alpha - v;
}

template <class F>
double golden_section_min(F f, double a, double b, double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double best = std::min(f(a), f(b));
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int iter = 0; iter < 400 && b - a > tolerance; ++iter) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    best = std::min({best, fc, fd});
  }
  return std::min({best, f(0.5 * (a + b))});
}

}  // namespace

double avar_bruteforce(const DiscreteVariable& x, double alpha, std::size_t grid_size) {
  if (grid_size == 0) throw std::invalid_argument("avar_bruteforce: grid_size must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::domain_error("avar_bruteforce: alpha must lie in (0,1]");
  }
  const auto atoms = distribution(x.values(), x.probabilities());
  std::size_t idx = 0;
  double sum = 0.0;
  for (std::size_t t = 0; t < grid_size; ++t) {
    const double level = alpha * (static_cast<double>(t) + 0.5) / static_cast<double>(grid_size);
    while (idx + 1 < atoms.size() && !(atoms[idx].cumulative > level)) ++idx;
    sum -= atoms[idx].value;
  }
  return sum / static_cast<double>(grid_size);
}

MinimaxSides minimax_gap(const ScenarioSet& scen, const Portfolio& x, const LevelFunction& gamma) {
  gamma.require_positive_levels();
  if (x.size() != scen.assets()) throw std::invalid_argument("minimax_gap: weight count mismatch");
  const std::size_t m = scen.outcomes();
  const auto probs = scen.probabilities();
  std::vector<std::vector<double>> positions(gamma.size(), std::vector<double>(m));
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    for (std::size_t s = 0; s < m; ++s) {
      double value = -gamma[i].threshold * scen.liabilities()[s];
      for (std::size_t k = 0; k < scen.assets(); ++k) value += x[k] * scen.asset_return(s, k);
      positions[i][s] = value;
    }
  }

  MinimaxSides sides{-kInf, 0.0};
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const double alpha = gamma[i].alpha;
    const auto atoms = distribution(positions[i], probs);
    const double a = lower_quantile(atoms, alpha);
    const double b = std::max(a, upper_quantile(atoms, alpha));
    auto f = [&](double v) { return shortfall_objective(positions[i], probs, v, alpha); };
    sides.lhs = std::max(sides.lhs, golden_section_min(f, a, b, 1e-12));
  }

  // min T s.t. (1/alpha_i) sum_s p_s u^i_s - v^i <= T, u^i_s >= v^i - L^i_s, u >= 0.
  LinearProgram lp;
  const std::size_t t = lp.add_variable(1.0, -kInfinity, kInfinity);
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const std::size_t v = lp.add_variable(0.0, -kInfinity, kInfinity);
    std::vector<Term> risk{{t, -1.0}, {v, -1.0}};
    for (std::size_t s = 0; s < m; ++s) {
      if (probs[s] == 0.0) continue;
      const std::size_t u = lp.add_variable(0.0);
      risk.push_back({u, probs[s] / gamma[i].alpha});
      lp.add_constraint({{u, 1.0}, {v, -1.0}}, Relation::greater_equal, -positions[i][s]);
    }
    lp.add_constraint(std::move(risk), Relation::less_equal, 0.0);
  }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) throw SolverError("minimax_gap: LP not optimal");
  sides.rhs = sol.objective_value;
  return sides;
}

PiecewiseLinearFunction::PiecewiseLinearFunction(std::vector<double> breakpoints,
                                                 std::vector<double> slopes, double anchor)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
  if (breakpoints_.empty()) throw std::invalid_argument("piecewise linear: need a breakpoint");
  if (slopes_.size() != breakpoints_.size() + 1) {
    throw std::invalid_argument("piecewise linear: need one more slope than breakpoints");
  }
  for (std::size_t t = 1; t < breakpoints_.size(); ++t) {
    if (!(breakpoints_[t] > breakpoints_[t - 1])) {
      throw std::invalid_argument("piecewise linear: breakpoints must increase");
    }
  }
  values_.push_back(anchor);
  for (std::size_t t = 1; t < breakpoints_.size(); ++t) {
    values_.push_back(values_.back() + slopes_[t] * (breakpoints_[t] - breakpoints_[t - 1]));
  }
}

double PiecewiseLinearFunction::operator()(double x) const {
  if (x <= breakpoints_.front()) return values_.front() + slopes_.front() * (x - breakpoints_.front());
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  const std::size_t t = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return values_[t] + slopes_[t + 1] * (x - breakpoints_[t]);
}

bool PiecewiseLinearFunction::convex() const {
  return std::is_sorted(slopes_.begin(), slopes_.end());
}

double PiecewiseLinearFunction::minimum() const {
  if (slopes_.front() > 0.0 || slopes_.back() < 0.0) return -kInf;
  return *std::min_element(values_.begin(), values_.end());
}

PiecewiseLinearFunction PiecewiseLinearFunction::shifted(double c) const {
  return PiecewiseLinearFunction(breakpoints_, slopes_, values_.front() + c);
}

double min_of_max(const std::vector<PiecewiseLinearFunction>& functions) {
  if (functions.empty()) throw std::invalid_argument("min_of_max: no functions");
  auto envelope = [&](double x) {
    double best = -kInf;
    for (const auto& f : functions) best = std::max(best, f(x));
    return best;
  };
  double left_slope = kInf;
  double right_slope = -kInf;
  std::vector<double> points;
  for (const auto& f : functions) {
    left_slope = std::min(left_slope, f.slopes().front());
    right_slope = std::max(right_slope, f.slopes().back());
    points.insert(points.end(), f.breakpoints().begin(), f.breakpoints().end());
  }
  if (left_slope > 0.0 || right_slope < 0.0) return -kInf;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // On each piece between consecutive points every f is affine, so the
  // envelope can only bend where two of them cross.
  std::vector<double> candidates(points);
  for (std::size_t t = 0; t <= points.size(); ++t) {
    const double lo = t == 0 ? -kInf : points[t - 1];
    const double hi = t == points.size() ? kInf : points[t];
    const double c = t == 0 ? hi - 1.0 : (t == points.size() ? lo + 1.0 : 0.5 * (lo + hi));
    for (std::size_t i = 0; i < functions.size(); ++i) {
      for (std::size_t j = i + 1; j < functions.size(); ++j) {
        if (std::isfinite(lo) && std::isfinite(hi)) {
          const double w = hi - lo;
          const double a = (functions[i](hi) - functions[i](lo)) / w;
          const double b = (functions[j](hi) - functions[j](lo)) / w;
          if (a == b) continue;
          const double x = lo + (functions[j](lo) - functions[i](lo)) / (a - b);
          if (x >= lo && x <= hi) candidates.push_back(x);
          continue;
        }
        const double si = functions[i](c + 0.5) - functions[i](c - 0.5);
        const double sj = functions[j](c + 0.5) - functions[j](c - 0.5);
        if (si == sj) continue;
        const double x = c + (functions[j](c) - functions[i](c)) / (si - sj);
        if (x >= lo && x <= hi) candidates.push_back(x);
      }
    }
  }
  double best = kInf;
  for (double x : candidates) best = std::min(best, envelope(x));
  return best;
}

std::vector<PiecewiseLinearFunction> counterexample_functions(double shift) {
  return {PiecewiseLinearFunction({-2.0, -1.0}, {-1.0, 0.0, 1.0}, shift),
          PiecewiseLinearFunction({1.0, 2.0}, {-1.0, 0.0, 1.0}, shift)};
}

CounterexampleValues appendix_counterexample(double shift) {
  const auto functions = counterexample_functions(shift);
  CounterexampleValues out{-kInf, min_of_max(functions), -kInf};
  for (const auto& f : functions) {
    if (!f.convex()) throw std::logic_error("counterexample functions must be convex");
    out.max_min = std::max(out.max_min, f.minimum());
    // Separate arguments: each f_i sits at its own minimizer.
    double own_min = kInf;
    for (double b : f.breakpoints()) own_min = std::min(own_min, f(b));
    out.min_max_separate = std::max(out.min_max_separate, own_min);
  }
  return out;
}

double case1_avar(double beta) {
  if (!(beta > 0.0 && beta <= 0.01)) throw std::domain_error("case1_avar: beta must lie in (0, 1%]");
  if (beta <= 0.001) return 0.04;
  return 0.000045 / beta - 0.005;
}

CaseOneClosedForm case1_closed_form(double beta, double r, double ell) {
  if (!(beta > 0.0 && beta < 0.01)) throw std::domain_error("case1_closed_form: beta must lie in (0, 1%)");
  if (!(r > 0.0 && r < 1.0)) throw std::domain_error("case1_closed_form: r must lie in (0,1)");
  if (!(ell > 0.0 && ell < 1.0)) throw std::domain_error("case1_closed_form: ell must lie in (0,1)");
  const double avar_alpha = -0.0005;
  const double avar_beta = case1_avar(beta);
  return {std::min((1.0 - r) * ell / (avar_beta - avar_alpha), 1.0), avar_beta};
}

bool PropertyReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.passed == p.trials; });
}

std::string PropertyReport::text() const {
  std::ostringstream out;
  out << "property suite, seed " << seed << "\n";
  char line[160];
  for (const auto& p : properties) {
    std::snprintf(line, sizeof line, "  %-22s %zu/%zu passed, worst violation %.3e\n",
                  p.name.c_str(), p.passed, p.trials, p.worst_violation);
    out << line;
  }
  out << (all_passed() ? "all properties hold\n" : "VIOLATIONS FOUND\n");
  return out.str();
}

std::string PropertyReport::csv() const {
  std::ostringstream out;
  out << "property,trials,worst_violation\n";
  char line[160];
  for (const auto& p : properties) {
    std::snprintf(line, sizeof line, "%s,%zu,%.17g\n", p.name.c_str(), p.trials, p.worst_violation);
    out << line;
  }
  return out.str();
}

namespace {

class TrialRandom {
 public:
  explicit TrialRandom(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> random_probabilities(TrialRandom& rng, std::size_t m) {
  std::vector<double> p(m);
  if (rng.uniform() < 0.3) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(m));
    return p;
  }
  double sum = 0.0;
  for (double& x : p) {
    x = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
    sum += x;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (double& x : p) x /= sum;
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < m; ++s) total += p[s];
  p[m - 1] = std::max(0.0, 1.0 - total);
  return p;
}

std::vector<double> random_values(TrialRandom& rng, std::size_t m, double lo, double hi) {
  std::vector<double> v(m);
  for (double& x : v) {
    // Occasional ties exercise the atom handling.
    x = rng.uniform() < 0.15 ? std::round(rng.uniform(lo, hi)) : rng.uniform(lo, hi);
  }
  return v;
}

LevelFunction random_levels(TrialRandom& rng) {
  const std::size_t n = rng.index(1, 4);
  std::vector<double> alphas(n), thresholds(n);
  for (double& a : alphas) a = rng.uniform(0.001, 1.0);
  for (double& r : thresholds) r = rng.uniform(0.01, 1.0);
  std::sort(alphas.begin(), alphas.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.back() = 1.0;
  std::vector<LevelFunction::Entry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    if (!entries.empty() &&
        (alphas[i] <= entries.back().alpha || thresholds[i] <= entries.back().threshold)) {
      continue;
    }
    entries.push_back({alphas[i], thresholds[i]});
  }
  entries.back().threshold = 1.0;
  return LevelFunction(std::move(entries));
}

struct Tally {
  PropertyResult result;
  void record(double violation) {
    ++result.trials;
    if (violation <= kPropertyTolerance) ++result.passed;
    result.worst_violation = std::max(result.worst_violation, violation);
  }
};

}  // namespace

PropertyReport property_suite(std::uint64_t seed, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("property_suite: trials must be >= 1");
  std::vector<Tally> tallies;
  for (const char* name : {"cash_invariance", "monotonicity", "subadditivity",
                           "positive_homogeneity", "avar_dominates_var", "avar_level_monotone",
                           "stricter_than_avar"}) {
    tallies.push_back({{name, 0, 0, 0.0}});
  }

  for (std::size_t t = 0; t < trials; ++t) {
    TrialRandom rng(trial_seed(seed, t));
    const std::size_t m = rng.index(1, 12);
    const auto probs = random_probabilities(rng, m);
    const LevelFunction gamma = random_levels(rng);
    const DiscreteVariable x(random_values(rng, m, -3.0, 3.0), probs);
    const DiscreteVariable y(random_values(rng, m, 0.0, 2.0), probs);
    const double base = rec_avar(x, y, gamma).value;

    const double c = rng.uniform(-5.0, 5.0);
    tallies[0].record(std::abs(rec_avar(x.shifted(c), y, gamma).value - (base - c)));

    const DiscreteVariable x_up = x.combine(1.0, DiscreteVariable(random_values(rng, m, 0.0, 1.0), probs), 1.0);
    const DiscreteVariable y_up = y.combine(1.0, DiscreteVariable(random_values(rng, m, 0.0, 1.0), probs), 1.0);
    tallies[1].record(std::max(0.0, rec_avar(x_up, y_up, gamma).value - base));

    const DiscreteVariable x2(random_values(rng, m, -3.0, 3.0), probs);
    const DiscreteVariable y2(random_values(rng, m, 0.0, 2.0), probs);
    const double joint = rec_avar(x.combine(1.0, x2, 1.0), y.combine(1.0, y2, 1.0), gamma).value;
    tallies[2].record(std::max(0.0, joint - base - rec_avar(x2, y2, gamma).value));

    const double a = rng.uniform() < 0.05 ? 0.0 : rng.uniform(0.0, 5.0);
    tallies[3].record(std::abs(rec_avar(x.scaled(a), y.scaled(a), gamma).value - a * base));

    const double level = rng.uniform() < 0.05 ? 0.0 : rng.uniform();
    tallies[4].record(
        std::max(0.0, value_at_risk(x, level) - average_value_at_risk(x, level)));

    std::vector<double> levels(6);
    for (double& l : levels) l = rng.uniform();
    levels.front() = 0.0;
    levels.back() = 1.0;
    std::sort(levels.begin(), levels.end());
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
      worst = std::max(worst, average_value_at_risk(x, levels[k + 1]) -
                                  average_value_at_risk(x, levels[k]));
    }
    tallies[5].record(worst);

    tallies[6].record(
        std::max(0.0, average_value_at_risk(x, gamma[gamma.size() - 1].alpha) - base));
  }

  PropertyReport report{seed, {}};
  for (auto& t : tallies) report.properties.push_back(std::move(t.result));
  return report;
}

RandomInstance random_instance(std::uint64_t seed) {
  TrialRandom rng(trial_seed(seed, 0));
  const std::size_t m = rng.index(2, 50);
  const std::size_t K = rng.index(1, 3);
  const std::size_t levels = rng.index(1, 4);

  std::vector<double> returns(m * K);
  for (double& r : returns) r = rng.uniform(-0.1, 0.1);
  std::vector<double> liabilities(m);
  const double scale = rng.uniform(0.0, 0.5);
  for (double& z : liabilities) z = rng.uniform() < 0.5 ? scale : rng.uniform(0.0, 0.5);
  ScenarioSet scen(K, std::move(returns), std::move(liabilities), random_probabilities(rng, m));

  std::vector<double> alphas(levels), thresholds(levels);
  for (double& a : alphas) a = rng.uniform(0.001, 0.2);
  for (double& r : thresholds) r = rng.uniform(0.05, 1.0);
  std::sort(alphas.begin(), alphas.end());
  std::sort(thresholds.begin(), thresholds.end());
  std::vector<LevelFunction::Entry> entries;
  for (std::size_t i = 0; i < levels; ++i) {
    if (!entries.empty() &&
        (alphas[i] <= entries.back().alpha || thresholds[i] <= entries.back().threshold)) {
      continue;
    }
    entries.push_back({alphas[i], thresholds[i]});
  }
  entries.back().threshold = 1.0;

  std::vector<double> weights(K);
  double sum = 0.0;
  for (double& w : weights) {
    w = rng.uniform();
    sum += w;
  }
  for (double& w : weights) w /= sum;
  return {std::move(scen), LevelFunction(std::move(entries)), Portfolio::from_solver(std::move(weights))};
}

MinimaxBatch minimax_batch(std::uint64_t seed, std::size_t count) {
  MinimaxBatch batch{count, 0.0};
  for (std::size_t t = 0; t < count; ++t) {
    const auto instance = random_instance(trial_seed(seed, t));
    const auto sides = minimax_gap(instance.scen, instance.weights, instance.gamma);
    batch.worst_gap = std::max(batch.worst_gap, std::abs(sides.lhs - sides.rhs));
  }
  return batch;
}

}  // namespace recavar
