#include "recavar/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "recavar/errors.hpp"

namespace recavar {

namespace {

constexpr double kProbabilitySumTolerance = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Uniform on the open interval (0,1) from the top 53 bits of a draw.
double open_uniform(std::mt19937_64& engine) {
  return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

void validate_probabilities(std::span<const double> probabilities, const char* what) {
  if (probabilities.empty()) throw std::invalid_argument(std::string(what) + ": empty");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0) {
      throw std::invalid_argument(std::string(what) + ": probabilities must be finite and >= 0");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": probabilities sum to " << sum << ", expected 1";
    throw std::invalid_argument(msg.str());
  }
}

ScenarioSet::ScenarioSet(std::size_t assets, std::vector<double> returns,
                         std::vector<double> liabilities, std::vector<double> probabilities)
    : assets_(assets),
      returns_(std::move(returns)),
      liabilities_(std::move(liabilities)),
      probabilities_(std::move(probabilities)) {
  if (assets_ == 0) throw std::invalid_argument("scenario set needs at least one asset");
  if (liabilities_.empty()) throw std::invalid_argument("scenario set needs at least one outcome");
  if (returns_.size() != liabilities_.size() * assets_ ||
      probabilities_.size() != liabilities_.size()) {
    throw std::invalid_argument("scenario set dimensions do not match");
  }
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(returns_.begin(), returns_.end(), finite) ||
      !std::all_of(liabilities_.begin(), liabilities_.end(), finite)) {
    throw std::invalid_argument("scenario set entries must be finite");
  }
  validate_probabilities(probabilities_, "scenario set");
}

ScenarioSet ScenarioSet::with_probabilities(std::vector<double> probabilities) const {
  return ScenarioSet(assets_, returns_, liabilities_, std::move(probabilities));
}

bool ScenarioSet::same_support(const ScenarioSet& other) const {
  return assets_ == other.assets_ && returns_ == other.returns_ &&
         liabilities_ == other.liabilities_;
}

std::vector<double> ScenarioSet::mean_returns() const { return mean_returns(probabilities_); }

std::vector<double> ScenarioSet::mean_returns(std::span<const double> probabilities) const {
  if (probabilities.size() != outcomes()) {
    throw std::invalid_argument("probability vector length differs from outcome count");
  }
  std::vector<double> mean(assets_, 0.0);
  for (std::size_t s = 0; s < outcomes(); ++s) {
    for (std::size_t k = 0; k < assets_; ++k) mean[k] += probabilities[s] * asset_return(s, k);
  }
  return mean;
}

std::vector<double> ScenarioSet::portfolio_returns(std::span<const double> weights) const {
  if (weights.size() != assets_) throw std::invalid_argument("weight vector length differs from K");
  std::vector<double> out(outcomes(), 0.0);
  for (std::size_t s = 0; s < outcomes(); ++s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < assets_; ++k) acc += weights[k] * asset_return(s, k);
    out[s] = acc;
  }
  return out;
}

void validate_marginal(const MarginalSpec& marginal) {
  std::visit(Overloaded{
                 [](const NormalMarginal& m) {
                   if (!(m.stddev > 0.0) || !std::isfinite(m.mean) || !std::isfinite(m.stddev))
                     throw std::invalid_argument("normal marginal needs stddev > 0");
                 },
                 [](const StudentTMarginal& m) {
                   if (!(m.scale > 0.0) || !(m.degrees_of_freedom > 0.0) ||
                       !std::isfinite(m.mean) || !std::isfinite(m.scale))
                     throw std::invalid_argument("student-t marginal needs scale > 0 and dof > 0");
                 },
                 [](const TwoPointMarginal& m) {
                   if (!(m.prob_up >= 0.0 && m.prob_up <= 1.0) || !std::isfinite(m.value_up) ||
                       !std::isfinite(m.value_down))
                     throw std::invalid_argument("two-point marginal needs prob_up in [0,1]");
                 },
                 [](const ConstantMarginal& m) {
                   if (!std::isfinite(m.value))
                     throw std::invalid_argument("constant marginal must be finite");
                 },
             },
             marginal);
}

double marginal_quantile(const MarginalSpec& marginal, TailProbability p) {
  return std::visit(
      Overloaded{
          [&](const NormalMarginal& m) { return m.mean + m.stddev * normal_quantile(p); },
          [&](const StudentTMarginal& m) {
            return m.mean + m.scale * student_t_quantile(p, m.degrees_of_freedom);
          },
          [&](const TwoPointMarginal& m) {
            // Lower quantile of the two-atom law, whichever atom is smaller.
            const bool up_is_low = m.value_up < m.value_down;
            const double low = up_is_low ? m.value_up : m.value_down;
            const double high = up_is_low ? m.value_down : m.value_up;
            const double low_mass = up_is_low ? m.prob_up : 1.0 - m.prob_up;
            return p.lower <= low_mass ? low : high;
          },
          [](const ConstantMarginal& m) { return m.value; },
      },
      marginal);
}

std::vector<std::vector<double>> psd_cholesky(const std::vector<std::vector<double>>& matrix) {
  const std::size_t n = matrix.size();
  constexpr double kTolerance = 1e-12;
  for (const auto& row : matrix) {
    if (row.size() != n) throw std::invalid_argument("correlation matrix must be square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(matrix[i][j]) || std::abs(matrix[i][j] - matrix[j][i]) > kTolerance) {
        throw std::invalid_argument("correlation matrix must be symmetric");
      }
    }
  }
  std::vector<std::vector<double>> lower(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double diag = matrix[j][j];
    for (std::size_t k = 0; k < j; ++k) diag -= lower[j][k] * lower[j][k];
    if (diag < -kTolerance) {
      throw std::invalid_argument("correlation matrix is not positive semidefinite");
    }
    if (diag <= kTolerance) {
      // Semidefinite direction: the column must already be explained.
      for (std::size_t i = j + 1; i < n; ++i) {
        double off = matrix[i][j];
        for (std::size_t k = 0; k < j; ++k) off -= lower[i][k] * lower[j][k];
        if (std::abs(off) > 1e-9) {
          throw std::invalid_argument("correlation matrix is not positive semidefinite");
        }
      }
      continue;
    }
    const double pivot = std::sqrt(diag);
    lower[j][j] = pivot;
    for (std::size_t i = j + 1; i < n; ++i) {
      double off = matrix[i][j];
      for (std::size_t k = 0; k < j; ++k) off -= lower[i][k] * lower[j][k];
      lower[i][j] = off / pivot;
    }
  }
  return lower;
}

void validate_sampler(const SamplerSpec& spec) {
  if (spec.marginals.empty()) throw std::invalid_argument("sampler needs at least one marginal");
  for (const auto& m : spec.marginals) validate_marginal(m);
  validate_marginal(spec.liability);
  if (const auto* copula = std::get_if<TCopulaDependence>(&spec.dependence)) {
    if (!(copula->degrees_of_freedom > 0.0) || !std::isfinite(copula->degrees_of_freedom)) {
      throw std::invalid_argument("t-copula needs degrees_of_freedom > 0");
    }
    if (copula->correlation.size() != spec.marginals.size()) {
      throw std::invalid_argument("correlation matrix size must equal the number of marginals");
    }
    for (std::size_t i = 0; i < copula->correlation.size(); ++i) {
      if (copula->correlation[i].size() != spec.marginals.size() ||
          std::abs(copula->correlation[i][i] - 1.0) > 1e-12) {
        throw std::invalid_argument("correlation matrix must be square with unit diagonal");
      }
    }
    psd_cholesky(copula->correlation);
  }
}

ScenarioSet sample_scenarios(const SamplerSpec& spec, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("sample count must be positive");
  validate_sampler(spec);

  const std::size_t assets = spec.marginals.size();
  std::mt19937_64 engine(seed);
  std::vector<double> returns(count * assets);
  std::vector<double> liabilities(count);
  std::vector<double> probabilities(count, 1.0 / static_cast<double>(count));

  const auto* copula = std::get_if<TCopulaDependence>(&spec.dependence);
  std::vector<std::vector<double>> chol;
  if (copula != nullptr) chol = psd_cholesky(copula->correlation);

  std::vector<double> gaussian(assets);
  for (std::size_t s = 0; s < count; ++s) {
    double* row = returns.data() + s * assets;
    if (copula == nullptr) {
      for (std::size_t k = 0; k < assets; ++k) {
        row[k] = marginal_quantile(spec.marginals[k],
                                   TailProbability::from_lower(open_uniform(engine)));
      }
    } else {
      for (auto& g : gaussian) g = normal_quantile(open_uniform(engine));
      const double nu = copula->degrees_of_freedom;
      const double chi2 = chi_squared_quantile(open_uniform(engine), nu);
      const double mix = std::sqrt(chi2 / nu);
      for (std::size_t k = 0; k < assets; ++k) {
        double correlated = 0.0;
        for (std::size_t j = 0; j <= k; ++j) correlated += chol[k][j] * gaussian[j];
        row[k] = marginal_quantile(spec.marginals[k], student_t_tails(correlated / mix, nu));
      }
    }
    liabilities[s] = marginal_quantile(spec.liability,
                                       TailProbability::from_lower(open_uniform(engine)));
  }
  return ScenarioSet(assets, std::move(returns), std::move(liabilities), std::move(probabilities));
}

ScenarioSet exact_two_point_set(double up, double p_up, double down, double liability) {
  if (!(p_up > 0.0 && p_up < 1.0)) throw std::domain_error("p_up must lie in (0,1)");
  return ScenarioSet(2, {0.0, up, 0.0, down}, {liability, liability}, {p_up, 1.0 - p_up});
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  if (field.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace

std::string format_scenarios(const ScenarioSet& set) {
  std::string out;
  for (std::size_t k = 0; k < set.assets(); ++k) out += "R" + std::to_string(k + 1) + ",";
  out += "Z,prob\n";
  for (std::size_t s = 0; s < set.outcomes(); ++s) {
    for (double r : set.returns_row(s)) out += format_double(r) + ",";
    out += format_double(set.liabilities()[s]) + "," + format_double(set.probabilities()[s]) + "\n";
  }
  return out;
}

ScenarioSet parse_scenarios(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::size_t assets = 0;
  bool have_header = false;
  std::size_t last_data_line = 0;
  std::vector<double> returns, liabilities, probabilities;

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 3) throw ParseError("malformed header", line_no);
      assets = fields.size() - 2;
      for (std::size_t k = 0; k < assets; ++k) {
        if (trim(fields[k]) != "R" + std::to_string(k + 1)) {
          throw ParseError("malformed header: expected R" + std::to_string(k + 1), line_no);
        }
      }
      if (trim(fields[assets]) != "Z" || trim(fields[assets + 1]) != "prob") {
        throw ParseError("malformed header: expected trailing Z,prob", line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != assets + 2) {
      throw ParseError("expected " + std::to_string(assets + 2) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    for (std::size_t k = 0; k < assets; ++k) returns.push_back(parse_double(fields[k], line_no));
    liabilities.push_back(parse_double(fields[assets], line_no));
    const double p = parse_double(fields[assets + 1], line_no);
    if (p < 0.0) throw ParseError("negative probability", line_no);
    probabilities.push_back(p);
    last_data_line = line_no;
  }
  if (!have_header) throw ParseError("no header");
  if (liabilities.empty()) throw ParseError("no scenario rows", line_no);
  try {
    return ScenarioSet(assets, std::move(returns), std::move(liabilities),
                       std::move(probabilities));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), last_data_line);
  }
}

ScenarioSet load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenarios(buffer.str());
}

void save_scenarios(const ScenarioSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write scenario file " + path.string());
  out << format_scenarios(set);
  if (!out) throw std::runtime_error("failed writing scenario file " + path.string());
}

}  // namespace recavar
