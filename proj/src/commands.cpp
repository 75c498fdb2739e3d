#include "recavar/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "recavar/errors.hpp"
#include "recavar/verify.hpp"

namespace recavar {

namespace {

constexpr double kMonotoneTolerance = 1e-6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  return res.ec == std::errc{} && res.ptr == text.data() + text.size() && std::isfinite(value);
}

[[noreturn]] void level_error(const std::string& message, std::size_t position) {
  throw ParseError("level function: " + message + " at position " + std::to_string(position));
}

void write_text(const std::optional<std::filesystem::path>& path, const std::string& text,
                std::ostream& out) {
  if (!path) {
    out << text;
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path->string());
  file << text;
  if (!file) throw std::runtime_error("failed writing " + path->string());
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  std::vector<double> grid(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    grid[t] = steps == 1 ? lo
                         : lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(steps - 1);
  }
  if (steps > 1) grid.back() = hi;
  return grid;
}

// Runs `body`, mapping exceptions to exit codes: bad input 2, numerical 1.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SolverError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

// Largest level risk converted to the balance sheet of a budget b:
// RecAV@R(E_1, L_1) = b * (risk - 1) when E_1 = b (1 + x.R - Z).
double balance_sheet(double budget, double risk) { return budget * (risk - 1.0); }

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

LevelFunction parse_level_function(std::string_view text) {
  if (trim(text).empty()) level_error("empty text", 1);
  std::vector<LevelFunction::Entry> entries;
  std::size_t start = 0;
  std::size_t last_start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view token = text.substr(start, end - start);
    const std::size_t position = start + 1;
    const std::size_t colon = token.find(':');
    if (colon == std::string_view::npos) level_error("expected alpha:r", position);
    double alpha = 0.0;
    double r = 0.0;
    if (!parse_number(token.substr(0, colon), alpha)) level_error("invalid alpha", position);
    if (!parse_number(token.substr(colon + 1), r)) {
      level_error("invalid threshold", position + colon + 1);
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) level_error("alpha must lie in [0,1]", position);
    if (!(r > 0.0 && r <= 1.0)) level_error("threshold must lie in (0,1]", position + colon + 1);
    if (!entries.empty() && !(alpha > entries.back().alpha)) {
      level_error("alphas must be strictly increasing", position);
    }
    if (!entries.empty() && !(r > entries.back().threshold)) {
      level_error("thresholds must be strictly increasing", position + colon + 1);
    }
    entries.push_back({alpha, r});
    last_start = position;
    start = end + 1;
  }
  if (entries.back().threshold != 1.0) level_error("last threshold must equal 1", last_start);
  return LevelFunction(std::move(entries));
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    double value = 0.0;
    if (!parse_number(text.substr(start, end - start), value)) {
      throw ParseError("invalid number at position " + std::to_string(start + 1));
    }
    values.push_back(value);
    start = end + 1;
  }
  return values;
}

std::vector<double> parse_mu_grid(std::string_view text) {
  const std::size_t first = text.find(':');
  const std::size_t second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos) throw ParseError("mu grid must look like lo:hi:steps");
  double lo = 0.0;
  double hi = 0.0;
  if (!parse_number(text.substr(0, first), lo)) throw ParseError("mu grid: invalid lower end");
  if (!parse_number(text.substr(first + 1, second - first - 1), hi)) {
    throw ParseError("mu grid: invalid upper end");
  }
  const std::string_view steps_text = trim(text.substr(second + 1));
  std::size_t steps = 0;
  const auto res =
      std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
  if (res.ec != std::errc{} || res.ptr != steps_text.data() + steps_text.size() || steps == 0) {
    throw ParseError("mu grid: steps must be a positive integer");
  }
  if (hi < lo) throw ParseError("mu grid: upper end below lower end");
  return linspace(lo, hi, steps);
}

int run_case1(const Case1Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    case1_closed_form(options.beta, options.r, options.ell);
    const ScenarioSet scen = exact_two_point_set(0.005, 0.999, -0.04, options.ell);
    const double alpha = 0.01;

    std::vector<double> betas;
    for (int k = 1; k <= 99; ++k) betas.push_back(k / 10000.0);
    betas.push_back(options.beta);
    std::sort(betas.begin(), betas.end());
    betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

    bool agree = true;
    std::ostringstream allocation;
    allocation << "beta,x_closed_form,x_lp,abs_diff\n";
    std::optional<OptimalPortfolio> chosen;
    for (double beta : betas) {
      const LevelFunction gamma({{beta, options.r}, {alpha, 1.0}});
      const auto closed = case1_closed_form(beta, options.r, options.ell);
      auto solved = solve_mean_risk(scen, gamma, 0.0, NominalModel{});
      if (solved.status != SolveStatus::optimal) {
        err << "diagnostic,beta=" << format_real(beta) << ",status=" << to_string(solved.status)
            << "\n";
        agree = false;
        continue;
      }
      const double x_lp = (*solved.weights)[1];
      const double diff = std::abs(x_lp - closed.x_star);
      allocation << format_real(beta) << ',' << format_real(closed.x_star) << ','
                 << format_real(x_lp) << ',' << format_real(diff) << '\n';
      if (diff > 1e-6) {
        err << "diagnostic,beta=" << format_real(beta) << ",closed_form="
            << format_real(closed.x_star) << ",lp=" << format_real(x_lp) << "\n";
        agree = false;
      }
      if (beta == options.beta) chosen = std::move(solved);
    }
    if (!chosen) return kExitFailure;

    const auto plain = solve_mean_risk(scen, LevelFunction::constant(alpha), 0.0, NominalModel{});
    if (plain.status != SolveStatus::optimal) {
      err << "diagnostic,AV@R optimization status=" << to_string(plain.status) << "\n";
      return kExitFailure;
    }
    const double budget = 1.0;
    const double capital_avar = balance_sheet(budget, plain.risk);
    const double capital_recavar = balance_sheet(budget, chosen->risk);
    std::ostringstream recovery;
    recovery << "lambda,recovery_avar,recovery_recavar\n";
    for (int k = 0; k <= 200; ++k) {
      const double lambda = k / 200.0;
      recovery << format_real(lambda) << ','
               << format_real(recovery_probability(scen, *plain.weights, budget, capital_avar, lambda))
               << ','
               << format_real(
                      recovery_probability(scen, *chosen->weights, budget, capital_recavar, lambda))
               << '\n';
    }

    if (options.out_prefix) {
      const auto base = options.out_prefix->string();
      write_text(std::filesystem::path(base + "_allocation.csv"), allocation.str(), out);
      write_text(std::filesystem::path(base + "_recovery.csv"), recovery.str(), out);
    } else {
      out << allocation.str() << '\n' << recovery.str();
    }
    return agree ? kExitOk : kExitFailure;
  });
}

Case2Result compute_case2(const Case2Options& options) {
  const LevelFunction gamma = parse_level_function(options.levels);
  if (options.m < 100) throw std::invalid_argument("case2: m must be at least 100");
  if (options.ells.empty() || options.box_sizes.empty()) {
    throw std::invalid_argument("case2: need at least one ell and one box size");
  }
  std::vector<double> ells = options.ells;
  std::vector<double> sizes = options.box_sizes;
  std::sort(ells.begin(), ells.end());
  std::sort(sizes.begin(), sizes.end());
  const double max_size = 1.0 / static_cast<double>(options.m);
  for (double ell : ells) {
    if (!(ell > 0.0 && ell < 1.0)) throw std::invalid_argument("case2: ell must lie in (0,1)");
  }
  for (double c : sizes) {
    if (!(c >= 0.0 && c <= max_size)) throw std::invalid_argument("case2: C must lie in [0, 1/m]");
  }

  SamplerSpec spec;
  spec.marginals = {NormalMarginal{0.0, 0.015}, StudentTMarginal{0.005, 0.01, 2.0}};
  spec.dependence = TCopulaDependence{{{1.0, 0.2}, {0.2, 1.0}}, 2.0};

  std::vector<ScenarioSet> sets;
  for (double ell : ells) {
    spec.liability = ConstantMarginal{ell};
    sets.push_back(sample_scenarios(spec, options.m, options.seed));
  }

  Case2Result result;
  if (options.mu_grid) {
    result.mu_grid = *options.mu_grid;
  } else {
    double top = std::numeric_limits<double>::infinity();
    for (double c : sizes) {
      top = std::min(top, feasible_mu_range(sets.front(), BoxModel::symmetric(options.m, c)).mu_max);
    }
    top -= 1e-9;
    result.mu_grid = linspace(std::min(0.0, top), top, 21);
  }

  FrontierOptions frontier_options;
  frontier_options.threads = options.threads;
  // risk[e][c][k]
  std::vector<std::vector<std::vector<const Case2Row*>>> grid;
  for (std::size_t e = 0; e < ells.size(); ++e) {
    for (double c : sizes) {
      const auto points = efficient_frontier(sets[e], gamma, BoxModel::symmetric(options.m, c),
                                             result.mu_grid, frontier_options);
      for (const auto& p : points) {
        Case2Row row{ells[e], c, p.mu, p.status, p.risk, {}};
        if (p.weights) row.weights.assign(p.weights->weights().begin(), p.weights->weights().end());
        result.rows.push_back(std::move(row));
      }
    }
  }

  const std::size_t nm = result.mu_grid.size();
  const std::size_t nc = sizes.size();
  auto at = [&](std::size_t e, std::size_t c, std::size_t k) -> const Case2Row& {
    return result.rows[(e * nc + c) * nm + k];
  };
  auto ok = [](const Case2Row& row) { return row.status == SolveStatus::optimal; };
  for (std::size_t e = 0; e < ells.size(); ++e) {
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t k = 0; k < nm; ++k) {
        const Case2Row& row = at(e, c, k);
        if (row.status == SolveStatus::failed) {
          result.monotone_in_mu = false;
          continue;
        }
        if (!ok(row)) continue;
        if (k + 1 < nm && ok(at(e, c, k + 1)) &&
            at(e, c, k + 1).risk < row.risk - kMonotoneTolerance) {
          result.monotone_in_mu = false;
        }
        if (c + 1 < nc && ok(at(e, c + 1, k)) &&
            at(e, c + 1, k).risk < row.risk - kMonotoneTolerance) {
          result.monotone_in_box = false;
        }
        if (e + 1 < ells.size() && ok(at(e + 1, c, k)) &&
            at(e + 1, c, k).risk < row.risk - kMonotoneTolerance) {
          result.dominance_in_ell = false;
        }
      }
    }
  }
  if (ells.size() > 1) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t k = 0; k < nm; ++k) {
        const Case2Row& small = at(0, c, k);
        const Case2Row& large = at(ells.size() - 1, c, k);
        if (!ok(small) || !ok(large) || !(small.risk > 0.0)) continue;
        const double ratio = large.risk / small.risk;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++result.ratio_points;
      }
    }
    if (result.ratio_points > 0) {
      result.min_ratio = lo;
      result.max_ratio = hi;
    }
  }

  if (options.scenarios_out) save_scenarios(sets.front(), *options.scenarios_out);
  return result;
}

std::string format_case2(const Case2Result& result) {
  std::ostringstream out;
  out << "ell,C,mu,status,risk,x1,x2\n";
  for (const auto& row : result.rows) {
    out << format_real(row.ell) << ',' << format_real(row.box_size) << ',' << format_real(row.mu)
        << ',' << to_string(row.status) << ',';
    if (row.status == SolveStatus::optimal) {
      out << format_real(row.risk);
      for (double w : row.weights) out << ',' << format_real(w);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

int run_case2(const Case2Options& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Case2Result result = compute_case2(options);
    write_text(options.out, format_case2(result), out);
    err << "monotone in mu: " << (result.monotone_in_mu ? "yes" : "NO") << "\n"
        << "monotone in C: " << (result.monotone_in_box ? "yes" : "NO") << "\n"
        << "larger ell dominates: " << (result.dominance_in_ell ? "yes" : "NO") << "\n";
    if (result.ratio_points > 0) {
      err << "risk ratio (largest ell / smallest ell): " << format_real(result.min_ratio) << " to "
          << format_real(result.max_ratio) << " over " << result.ratio_points << " points\n";
    }
    const bool pass = result.monotone_in_mu && result.monotone_in_box && result.dominance_in_ell;
    return pass ? kExitOk : kExitFailure;
  });
}

int run_verify(std::uint64_t seed, std::size_t trials, std::ostream& out, std::ostream& err) {
  if (trials == 0) {
    err << "error: --trials must be at least 1\n";
    return kExitUsage;
  }
  return guarded(err, [&] {
    const PropertyReport report = property_suite(seed, trials);
    out << report.text();

    const MinimaxBatch batch = minimax_batch(seed, 200);
    const bool minimax_ok = batch.worst_gap <= 1e-7;
    out << "minimax: " << batch.instances << " instances, worst |max-min - min-max| = "
        << format_real(batch.worst_gap) << (minimax_ok ? " ok" : " FAILED") << "\n";

    const auto appendix = appendix_counterexample();
    const bool appendix_ok = appendix.max_min == 0.0 && appendix.min_max_shared == 1.0;
    out << "appendix counterexample: max-min = " << format_real(appendix.max_min)
        << ", min-max = " << format_real(appendix.min_max_shared)
        << (appendix_ok ? " ok" : " FAILED") << "\n";

    return report.all_passed() && minimax_ok && appendix_ok ? kExitOk : kExitFailure;
  });
}

UncertaintyModel make_model(const ScenarioSet& scen, const ModelOptions& options) {
  if (options.box_size && !options.mixture_files.empty()) {
    throw std::invalid_argument("choose either --box-c or --mixture, not both");
  }
  if (options.box_size) return BoxModel::symmetric(scen.outcomes(), *options.box_size);
  if (options.mixture_files.empty()) return NominalModel{};
  MixtureModel mixture;
  for (const auto& path : options.mixture_files) {
    const ScenarioSet other = load_scenarios(path);
    if (!scen.same_support(other)) {
      throw std::invalid_argument("mixture file " + path.string() +
                                  " does not share the scenario support");
    }
    mixture.probability_vectors.emplace_back(other.probabilities().begin(),
                                             other.probabilities().end());
  }
  return mixture;
}

int run_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioSet scen = load_scenarios(options.scenarios);
    const LevelFunction gamma = parse_level_function(options.levels);
    if (options.weights.size() != scen.assets()) {
      throw std::invalid_argument("expected " + std::to_string(scen.assets()) + " weights");
    }
    const Portfolio x(options.weights);
    const auto value = rec_avar(position(scen, x.weights(), 1.0), liability_variable(scen), gamma);
    out << "rec_avar,level,alpha,threshold";
    if (options.budget) out << ",balance_sheet";
    out << '\n'
        << format_real(value.value) << ',' << value.index + 1 << ','
        << format_real(gamma[value.index].alpha) << ',' << format_real(gamma[value.index].threshold);
    if (options.budget) out << ',' << format_real(balance_sheet(*options.budget, value.value));
    out << '\n';
    return kExitOk;
  });
}

int run_optimize(const OptimizeOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioSet scen = load_scenarios(options.scenarios);
    const LevelFunction gamma = parse_level_function(options.levels);
    const UncertaintyModel model = make_model(scen, options.model);
    const auto solved = solve_mean_risk(scen, gamma, options.mu, model);

    out << "status,risk";
    for (std::size_t k = 0; k < scen.assets(); ++k) out << ",x" << k + 1;
    for (std::size_t i = 0; i < gamma.size(); ++i) out << ",v" << i + 1;
    if (options.budget) out << ",balance_sheet";
    out << '\n' << to_string(solved.status) << ',';
    if (solved.status == SolveStatus::optimal) {
      out << format_real(solved.risk);
      for (double w : solved.weights->weights()) out << ',' << format_real(w);
      for (double v : solved.v_star) out << ',' << format_real(v);
      if (options.budget) out << ',' << format_real(balance_sheet(*options.budget, solved.risk));
    } else {
      out << std::string(scen.assets() + gamma.size() + (options.budget ? 1 : 0), ',');
    }
    out << '\n';
    if (solved.status == SolveStatus::failed) {
      err << "error: " << solved.message << "\n";
      return kExitFailure;
    }
    return kExitOk;
  });
}

int run_frontier(const FrontierCommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioSet scen = load_scenarios(options.scenarios);
    const LevelFunction gamma = parse_level_function(options.levels);
    const UncertaintyModel model = make_model(scen, options.model);
    std::vector<double> grid;
    if (options.mu_grid) {
      grid = *options.mu_grid;
    } else {
      const auto range = feasible_mu_range(scen, model);
      grid = linspace(range.mu_min, range.mu_max - 1e-9, 21);
    }
    FrontierOptions frontier_options;
    frontier_options.threads = options.threads;
    const auto points = efficient_frontier(scen, gamma, model, grid, frontier_options);

    std::ostringstream text;
    text << "mu,status,risk";
    for (std::size_t k = 0; k < scen.assets(); ++k) text << ",x" << k + 1;
    text << '\n';
    bool pass = true;
    const FrontierPoint* previous = nullptr;
    for (const auto& p : points) {
      text << format_real(p.mu) << ',' << to_string(p.status) << ',';
      if (p.status == SolveStatus::optimal) {
        text << format_real(p.risk);
        for (double w : p.weights->weights()) text << ',' << format_real(w);
        if (previous && p.risk < previous->risk - kMonotoneTolerance) pass = false;
        previous = &p;
      } else {
        text << std::string(scen.assets(), ',');
        if (p.status == SolveStatus::failed) pass = false;
      }
      text << '\n';
    }
    write_text(options.out, text.str(), out);
    if (!pass) err << "error: frontier is not monotone or a point failed\n";
    return pass ? kExitOk : kExitFailure;
  });
}

}  // namespace recavar
