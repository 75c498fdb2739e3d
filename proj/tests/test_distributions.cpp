#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "recavar/distributions.hpp"

using namespace recavar;

namespace {

// Standard normal CDF coded from erfc, independent of the library.
double reference_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bisect_normal(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (reference_normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("normal quantile") {
  CHECK(std::abs(normal_quantile(0.5)) < 1e-15);
  CHECK(std::abs(normal_quantile(0.975) - bisect_normal(0.975)) < 1e-9);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (double p : {0.001, 0.2, 0.4, 0.49}) {
    CHECK(std::abs(normal_quantile(p) + normal_quantile(1.0 - p)) < 1e-12);
    CHECK(std::abs(normal_quantile(p) - bisect_normal(p)) < 1e-9);
  }
  // 1 - 1e-8 is not exact in binary; pass both tails explicitly.
  CHECK(std::abs(normal_quantile(1e-8) + normal_quantile(TailProbability{1.0 - 1e-8, 1e-8})) < 1e-12);
  CHECK(std::abs(normal_quantile(1e-8) - bisect_normal(1e-8)) < 1e-9);
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("normal quantile keeps precision in the upper tail") {
  const double x = normal_quantile(TailProbability{1.0 - 1e-20, 1e-20});
  CHECK(x > 9.0);
  CHECK(0.5 * std::erfc(x / std::sqrt(2.0)) == doctest::Approx(1e-20).epsilon(1e-9));
}

TEST_CASE("student t quantile closed forms") {
  for (double nu : {0.5, 1.0, 2.0, 7.5, 100.0}) CHECK(std::abs(student_t_quantile(0.5, nu)) < 1e-14);
  CHECK(student_t_quantile(0.75, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  const double p = 0.9;
  CHECK(student_t_quantile(p, 2.0) ==
        doctest::Approx((2 * p - 1) / std::sqrt(2 * p * (1 - p))).epsilon(1e-12));
  CHECK(student_t_quantile(0.9, 2.0) == doctest::Approx(1.885618083164127).epsilon(1e-12));
  // Cauchy: tan(pi (p - 1/2)).
  for (double q : {0.01, 0.3, 0.6, 0.95}) {
    CHECK(student_t_quantile(q, 1.0) == doctest::Approx(std::tan(M_PI * (q - 0.5))).epsilon(1e-10));
  }
}

TEST_CASE("student t quantile inverts the cdf") {
  for (double nu : {1.0, 2.0, 3.5, 30.0}) {
    double previous = -INFINITY;
    for (int k = 1; k < 100; ++k) {
      const double p = k / 100.0;
      const double q = student_t_quantile(p, nu);
      CHECK(std::abs(student_t_cdf(q, nu) - p) <= 1e-10);
      CHECK(q >= previous);
      previous = q;
    }
  }
  CHECK_THROWS_AS(student_t_quantile(0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(1.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(0.3, 0.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(0.3, -1.0), std::domain_error);
}

TEST_CASE("student t tails sum to one") {
  for (double x : {-50.0, -2.0, 0.0, 0.3, 8.0}) {
    const auto tails = student_t_tails(x, 2.0);
    CHECK(tails.lower + tails.upper == doctest::Approx(1.0).epsilon(1e-15));
    // Closed-form 2-df cdf.
    CHECK(tails.lower == doctest::Approx(0.5 + x / (2 * std::sqrt(2 + x * x))).epsilon(1e-12));
  }
}

TEST_CASE("chi-squared quantile with two degrees of freedom") {
  for (double p : {0.01, 0.5, 0.99}) {
    CHECK(chi_squared_quantile(p, 2.0) == doctest::Approx(-2.0 * std::log1p(-p)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(chi_squared_quantile(0.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(chi_squared_quantile(0.5, 0.0), std::domain_error);
}
