#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "recavar/errors.hpp"
#include "recavar/lp.hpp"

using namespace recavar;

namespace {

struct Dense {
  std::vector<std::vector<double>> a;  // rows a x >= b
  std::vector<double> b;
  std::vector<double> c;
};

LinearProgram to_lp(const Dense& d, double upper = kInfinity) {
  LinearProgram lp;
  for (double cost : d.c) lp.add_variable(cost, 0.0, upper);
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    std::vector<Term> terms;
    for (std::size_t k = 0; k < d.c.size(); ++k) {
      if (d.a[i][k] != 0.0) terms.push_back({k, d.a[i][k]});
    }
    lp.add_constraint(terms, Relation::greater_equal, d.b[i]);
  }
  return lp;
}

// Feasible by construction (x0 satisfies every row), bounded since c > 0.
Dense random_dense(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> coef(-1.0, 2.0), pos(0.1, 1.0);
  Dense d{std::vector<std::vector<double>>(rows, std::vector<double>(cols)),
          std::vector<double>(rows), std::vector<double>(cols)};
  std::vector<double> x0(cols);
  for (double& v : x0) v = pos(rng) * 3.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double activity = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      d.a[i][k] = coef(rng);
      activity += d.a[i][k] * x0[k];
    }
    d.b[i] = activity - pos(rng);
  }
  for (double& v : d.c) v = pos(rng);
  return d;
}

// min c.x over a 2-d polygon {a x >= b, 0 <= x <= box} by vertex enumeration.
double enumerate_2d(const Dense& d, double box) {
  std::vector<std::array<double, 3>> lines;  // a0 x + a1 y = b
  for (std::size_t i = 0; i < d.a.size(); ++i) lines.push_back({d.a[i][0], d.a[i][1], d.b[i]});
  lines.push_back({1, 0, 0});
  lines.push_back({0, 1, 0});
  lines.push_back({1, 0, box});
  lines.push_back({0, 1, box});
  double best = INFINITY;
  for (std::size_t p = 0; p < lines.size(); ++p) {
    for (std::size_t q = p + 1; q < lines.size(); ++q) {
      const double det = lines[p][0] * lines[q][1] - lines[p][1] * lines[q][0];
      if (std::abs(det) < 1e-12) continue;
      const double x = (lines[p][2] * lines[q][1] - lines[p][1] * lines[q][2]) / det;
      const double y = (lines[p][0] * lines[q][2] - lines[p][2] * lines[q][0]) / det;
      bool ok = x >= -1e-9 && y >= -1e-9 && x <= box + 1e-9 && y <= box + 1e-9;
      for (std::size_t i = 0; ok && i < d.a.size(); ++i) {
        ok = d.a[i][0] * x + d.a[i][1] * y >= d.b[i] - 1e-9;
      }
      if (ok) best = std::min(best, d.c[0] * x + d.c[1] * y);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("small programs") {
  LinearProgram one;
  one.add_variable(1.0);
  one.add_constraint({{0, 1.0}}, Relation::greater_equal, 1.0);
  auto s = solve_lp(one);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(1.0));
  CHECK(s.objective_value == doctest::Approx(1.0));
  CHECK(check_feasible(one, s.x));

  LinearProgram face;
  face.add_variable(-1.0);
  face.add_variable(-1.0);
  face.add_constraint({{0, 1.0}, {1, 1.0}}, Relation::less_equal, 1.0);
  s = solve_lp(face);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective_value == doctest::Approx(-1.0));
  CHECK(check_feasible(face, s.x));

  LinearProgram empty_set;
  empty_set.add_variable(1.0);
  empty_set.add_constraint({{0, 1.0}}, Relation::less_equal, -1.0);
  CHECK(solve_lp(empty_set).status == LpStatus::infeasible);

  LinearProgram unbounded;
  unbounded.add_variable(-1.0);
  unbounded.add_constraint({{0, 1.0}}, Relation::greater_equal, 1.0);
  CHECK(solve_lp(unbounded).status == LpStatus::unbounded);
}

TEST_CASE("free, negative and boxed variables") {
  LinearProgram lp;
  const auto t = lp.add_variable(1.0, -kInfinity, kInfinity);
  const auto y = lp.add_variable(0.0, -kInfinity, 0.0);
  const auto z = lp.add_variable(-2.0, -3.0, 4.0);
  lp.add_constraint({{t, 1.0}, {y, 1.0}}, Relation::greater_equal, -5.0);
  lp.add_constraint({{y, 1.0}}, Relation::greater_equal, -2.0);
  lp.add_constraint({{t, 1.0}, {z, -1.0}}, Relation::equal, 0.0);
  // t = z, t >= -5 - y >= -3; minimize t - 2z = -z, so z = 4.
  const auto s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x[z] == doctest::Approx(4.0));
  CHECK(s.x[t] == doctest::Approx(4.0));
  CHECK(s.objective_value == doctest::Approx(-4.0));
  CHECK(check_feasible(lp, s.x));
}

TEST_CASE("no variables") {
  LinearProgram lp;
  const auto s = solve_lp(lp);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.objective_value == 0.0);
}

TEST_CASE("check_feasible") {
  LinearProgram lp;
  lp.add_variable(1.0, 0.0, 2.0);
  CHECK(check_feasible(lp, std::vector<double>{1.0}));
  CHECK_FALSE(check_feasible(lp, std::vector<double>{3.0}));
  lp.add_constraint({{0, 1.0}}, Relation::less_equal, 1.0);
  CHECK(check_feasible(lp, std::vector<double>{1.0}));
  CHECK_FALSE(check_feasible(lp, std::vector<double>{2.0}));
  CHECK_FALSE(check_feasible(lp, std::vector<double>{1.0, 0.0}));
}

TEST_CASE("two-variable programs match vertex enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Dense d = random_dense(rng, 2 + trial % 6, 2);
    const auto s = solve_lp(to_lp(d, 10.0));
    const double oracle = enumerate_2d(d, 10.0);
    if (std::isinf(oracle)) {
      CHECK(s.status == LpStatus::infeasible);
    } else {
      REQUIRE(s.status == LpStatus::optimal);
      CHECK(s.objective_value == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("random programs: duality and row order") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t rows = 3 + trial % 12, cols = 2 + trial % 9;
    const Dense d = random_dense(rng, rows, cols);
    const auto primal = solve_lp(to_lp(d));
    REQUIRE(primal.status == LpStatus::optimal);
    CHECK(check_feasible(to_lp(d), primal.x));

    // Dual: max b.y, A^T y <= c, y >= 0, written as min -b.y.
    Dense dual;
    dual.c.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) dual.c[i] = -d.b[i];
    for (std::size_t k = 0; k < cols; ++k) {
      std::vector<double> row(rows);
      for (std::size_t i = 0; i < rows; ++i) row[i] = -d.a[i][k];
      dual.a.push_back(row);
      dual.b.push_back(-d.c[k]);
    }
    const auto dual_solution = solve_lp(to_lp(dual));
    REQUIRE(dual_solution.status == LpStatus::optimal);
    CHECK(-dual_solution.objective_value == doctest::Approx(primal.objective_value).epsilon(1e-8));

    // Weak duality for a scaled-down dual point.
    std::vector<double> y = dual_solution.x;
    const double shrink = unit(rng);
    double dual_value = 0.0;
    for (std::size_t i = 0; i < rows; ++i) dual_value += shrink * y[i] * d.b[i];
    CHECK(dual_value <= primal.objective_value + 1e-9 * (1.0 + std::abs(primal.objective_value)));

    Dense permuted = d;
    std::vector<std::size_t> order(rows);
    for (std::size_t i = 0; i < rows; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < rows; ++i) {
      permuted.a[i] = d.a[order[i]];
      permuted.b[i] = d.b[order[i]];
    }
    const auto again = solve_lp(to_lp(permuted));
    REQUIRE(again.status == LpStatus::optimal);
    CHECK(std::abs(again.objective_value - primal.objective_value) <= 1e-9);
  }
}

TEST_CASE("degenerate program terminates") {
  // Many redundant rows through the optimum.
  LinearProgram lp;
  lp.add_variable(1.0);
  lp.add_variable(1.0);
  for (int k = 0; k < 40; ++k) {
    const double w = 1.0 + k * 0.01;
    lp.add_constraint({{0, w}, {1, w}}, Relation::greater_equal, w);
    lp.add_constraint({{0, 1.0}, {1, 0.0}}, Relation::less_equal, 1.0);
  }
  const auto s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.objective_value == doctest::Approx(1.0));
}
