#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>

#include "recavar/errors.hpp"
#include "recavar/scenarios.hpp"

using namespace recavar;

namespace {

SamplerSpec case_two_spec(double liability) {
  SamplerSpec spec;
  spec.marginals = {NormalMarginal{0.0, 0.015}, StudentTMarginal{0.005, 0.01, 2.0}};
  spec.dependence = TCopulaDependence{{{1.0, 0.2}, {0.2, 1.0}}, 2.0};
  spec.liability = ConstantMarginal{liability};
  return spec;
}

// Merge sort returning the number of inversions.
long long count_inversions(std::vector<double>& v, std::size_t lo, std::size_t hi,
                           std::vector<double>& buffer) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = (lo + hi) / 2;
  long long count = count_inversions(v, lo, mid, buffer) + count_inversions(v, mid, hi, buffer);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      count += static_cast<long long>(mid - i);
      buffer[k++] = v[j++];
    } else {
      buffer[k++] = v[i++];
    }
  }
  while (i < mid) buffer[k++] = v[i++];
  while (j < hi) buffer[k++] = v[j++];
  std::copy(buffer.begin() + lo, buffer.begin() + hi, v.begin() + lo);
  return count;
}

double kendall_tau(const ScenarioSet& set) {
  const std::size_t n = set.outcomes();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return set.asset_return(a, 0) < set.asset_return(b, 0); });
  std::vector<double> y(n), buffer(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = set.asset_return(order[i], 1);
  const double discordant = static_cast<double>(count_inversions(y, 0, n, buffer));
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * discordant / pairs;
}

}  // namespace

TEST_CASE("scenario set validation") {
  CHECK_NOTHROW(ScenarioSet(1, {0.1}, {0.0}, {1.0}));
  CHECK_THROWS_AS(ScenarioSet(1, {0.1, 0.2}, {0.0, 0.0}, {0.5, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioSet(1, {0.1}, {0.0}, {-0.0001}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioSet(2, {0.1}, {0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioSet(1, {NAN}, {0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioSet(0, {}, {}, {}), std::invalid_argument);
}

TEST_CASE("exact two point set") {
  const auto set = exact_two_point_set(0.005, 0.999, -0.04, 0.10);
  CHECK(set.outcomes() == 2);
  CHECK(set.assets() == 2);
  CHECK(set.asset_return(0, 0) == 0.0);
  CHECK(set.asset_return(0, 1) == 0.005);
  CHECK(set.asset_return(1, 0) == 0.0);
  CHECK(set.asset_return(1, 1) == -0.04);
  CHECK(set.liabilities()[0] == 0.10);
  CHECK(set.liabilities()[1] == 0.10);
  CHECK(set.probabilities()[0] == 0.999);
  CHECK(set.probabilities()[1] == doctest::Approx(0.001).epsilon(1e-12));

  const auto zero = exact_two_point_set(0.0, 0.5, 0.0, 0.0);
  for (double r : zero.returns()) CHECK(r == 0.0);
  CHECK(zero.probabilities()[0] == 0.5);
  CHECK(zero.probabilities()[1] == 0.5);

  const auto other = exact_two_point_set(0.01, 0.9, -0.02, 0.5);
  CHECK(other.mean_returns()[1] == doctest::Approx(0.007).epsilon(1e-14));
  CHECK_THROWS_AS(exact_two_point_set(0.01, 1.0, -0.02, 0.5), std::domain_error);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto spec = case_two_spec(0.1);
  const auto a = sample_scenarios(spec, 2000, 42);
  const auto b = sample_scenarios(spec, 2000, 42);
  const auto c = sample_scenarios(spec, 2000, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (double p : a.probabilities()) CHECK(p == 1.0 / 2000.0);
  for (double z : a.liabilities()) CHECK(z == 0.1);
}

TEST_CASE("constant marginals give constant rows") {
  SamplerSpec spec;
  spec.marginals = {ConstantMarginal{0.01}, ConstantMarginal{-0.02}, ConstantMarginal{0.0}};
  spec.liability = ConstantMarginal{0.3};
  const auto set = sample_scenarios(spec, 50, 7);
  for (std::size_t j = 0; j < set.outcomes(); ++j) {
    CHECK(set.asset_return(j, 0) == 0.01);
    CHECK(set.asset_return(j, 1) == -0.02);
    CHECK(set.asset_return(j, 2) == 0.0);
    CHECK(set.liabilities()[j] == 0.3);
  }
}

TEST_CASE("sampled t marginal has the right center") {
  const auto set = sample_scenarios(case_two_spec(0.1), 50000, 2024);
  double mean = 0.0;
  for (std::size_t j = 0; j < set.outcomes(); ++j) mean += set.asset_return(j, 1);
  mean /= static_cast<double>(set.outcomes());
  double var = 0.0;
  for (std::size_t j = 0; j < set.outcomes(); ++j) {
    var += (set.asset_return(j, 1) - mean) * (set.asset_return(j, 1) - mean);
  }
  var /= static_cast<double>(set.outcomes() - 1);
  const double se = std::sqrt(var / static_cast<double>(set.outcomes()));
  CHECK(std::abs(mean - 0.005) <= 3.0 * se);

  // The normal marginal: mean 0, sd 1.5%.
  double m0 = 0.0, v0 = 0.0;
  for (std::size_t j = 0; j < set.outcomes(); ++j) m0 += set.asset_return(j, 0);
  m0 /= 50000.0;
  for (std::size_t j = 0; j < set.outcomes(); ++j) v0 += std::pow(set.asset_return(j, 0) - m0, 2);
  CHECK(std::sqrt(v0 / 49999.0) == doctest::Approx(0.015).epsilon(0.02));
}

TEST_CASE("kendall tau of the t copula") {
  SamplerSpec spec = case_two_spec(0.0);
  spec.dependence = TCopulaDependence{{{1.0, 0.0}, {0.0, 1.0}}, 2.0};
  CHECK(std::abs(kendall_tau(sample_scenarios(spec, 50000, 11))) <= 0.02);

  // Elliptical copulas: tau = (2/pi) arcsin(rho).
  const double rho_tau = 2.0 / M_PI * std::asin(0.2);
  CHECK(std::abs(kendall_tau(sample_scenarios(case_two_spec(0.0), 50000, 12)) - rho_tau) <= 0.02);
}

TEST_CASE("sampler validation") {
  SamplerSpec spec = case_two_spec(0.1);
  spec.dependence = TCopulaDependence{{{1.0, 1.2}, {1.2, 1.0}}, 2.0};
  CHECK_THROWS_AS(sample_scenarios(spec, 10, 1), std::invalid_argument);
  spec.dependence = TCopulaDependence{{{1.0, 0.2}, {0.2, 1.0}}, 0.0};
  CHECK_THROWS_AS(sample_scenarios(spec, 10, 1), std::invalid_argument);
  spec = case_two_spec(0.1);
  spec.marginals[0] = NormalMarginal{0.0, 0.0};
  CHECK_THROWS_AS(sample_scenarios(spec, 10, 1), std::invalid_argument);
  spec = case_two_spec(0.1);
  CHECK_THROWS_AS(sample_scenarios(spec, 0, 1), std::invalid_argument);
  // Perfect correlation is semidefinite and allowed.
  spec.dependence = TCopulaDependence{{{1.0, 1.0}, {1.0, 1.0}}, 3.0};
  CHECK_NOTHROW(sample_scenarios(spec, 10, 1));
}

TEST_CASE("psd cholesky") {
  const auto l = psd_cholesky({{4.0, 2.0}, {2.0, 2.0}});
  CHECK(l[0][0] == doctest::Approx(2.0));
  CHECK(l[1][0] == doctest::Approx(1.0));
  CHECK(l[1][1] == doctest::Approx(1.0));
  CHECK(l[0][1] == 0.0);
  CHECK_THROWS_AS(psd_cholesky({{1.0, 2.0}, {2.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(psd_cholesky({{1.0, 0.5}, {0.4, 1.0}}), std::invalid_argument);
}

TEST_CASE("scenario file round trip") {
  const auto set = sample_scenarios(case_two_spec(0.25), 300, 5);
  const auto path = std::filesystem::temp_directory_path() / "recavar_roundtrip.csv";
  save_scenarios(set, path);
  const auto loaded = load_scenarios(path);
  std::filesystem::remove(path);
  CHECK(loaded == set);

  const auto weighted = ScenarioSet(2, {0.1, -0.2, 1.0 / 3.0, 2e-300}, {0.0, 0.7}, {0.3, 0.7});
  CHECK(parse_scenarios(format_scenarios(weighted)) == weighted);
}

TEST_CASE("scenario file errors") {
  CHECK_THROWS_WITH_AS(parse_scenarios(""), doctest::Contains("no header"), ParseError);
  CHECK_THROWS_AS(parse_scenarios("R1,Z,prob\n0.1,0,0.5\n0.2,0,0.4\n"), ParseError);
  try {
    parse_scenarios("R1,R2,Z,prob\n0.1,0.2,0,0.5\n0.1,0,0.5\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_scenarios("R1,Q,prob\n0.1,0,1\n"), ParseError);
  CHECK_THROWS_AS(parse_scenarios("R1,Z,prob\n0.1,abc,1\n"), ParseError);
  CHECK(parse_scenarios("R1,Z,prob\r\n0.1,0,1\r\n\n").outcomes() == 1);
}
