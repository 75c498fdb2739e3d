#pragma once

#include <span>
#include <vector>

#include "recavar/optimize.hpp"

namespace recavar::detail {

// Picks extreme measures from an uncertainty set.
class MeasureOracle {
 public:
  MeasureOracle(const ScenarioSet& scen, const UncertaintyModel& model);

  std::vector<double> maximizing(std::span<const double> values) const;
  std::vector<double> minimizing(std::span<const double> values) const;

  // The finite generating set for nominal and mixture models, else empty.
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }
  bool finite() const { return !vertices_.empty(); }

  std::span<const double> benchmark() const { return benchmark_; }

 private:
  std::vector<std::vector<double>> vertices_;
  std::vector<double> benchmark_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

OptimalPortfolio solve_with_cutting_planes(const ScenarioSet& scen, const LevelFunction& gamma,
                                           double mu, const MeasureOracle& oracle,
                                           const SolveOptions& options);

// Largest worst-case mean over the simplex together with a maximizer.
struct BestMean {
  double value;
  std::vector<double> weights;
};
BestMean max_worst_case_mean(const ScenarioSet& scen, const MeasureOracle& oracle,
                             const SolveOptions& options);

}  // namespace recavar::detail
