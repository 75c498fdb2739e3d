#include "recavar/distributions.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace recavar {

namespace {

void require_open_unit(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(std::string(who) + ": probability must lie in (0,1), got " +
                            std::to_string(p));
  }
}

void require_positive_dof(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("degrees of freedom must be positive and finite");
  }
}

void require_tails(TailProbability p, const char* who) {
  if (!(p.lower > 0.0 && p.upper > 0.0)) {
    throw std::domain_error(std::string(who) + ": tail probabilities must be positive");
  }
}

const boost::math::normal_distribution<double> kStandardNormal{0.0, 1.0};

}  // namespace

double normal_cdf(double x) { return boost::math::cdf(kStandardNormal, x); }

double normal_quantile(double p) {
  require_open_unit(p, "normal_quantile");
  return boost::math::quantile(kStandardNormal, p);
}

double normal_quantile(TailProbability p) {
  require_tails(p, "normal_quantile");
  if (p.lower <= 0.5) return boost::math::quantile(kStandardNormal, p.lower);
  return boost::math::quantile(boost::math::complement(kStandardNormal, p.upper));
}

double student_t_cdf(double x, double degrees_of_freedom) {
  require_positive_dof(degrees_of_freedom);
  return boost::math::cdf(boost::math::students_t_distribution<double>(degrees_of_freedom), x);
}

TailProbability student_t_tails(double x, double degrees_of_freedom) {
  require_positive_dof(degrees_of_freedom);
  const boost::math::students_t_distribution<double> dist(degrees_of_freedom);
  return {boost::math::cdf(dist, x), boost::math::cdf(boost::math::complement(dist, x))};
}

double student_t_quantile(double p, double degrees_of_freedom) {
  require_open_unit(p, "student_t_quantile");
  require_positive_dof(degrees_of_freedom);
  return boost::math::quantile(boost::math::students_t_distribution<double>(degrees_of_freedom), p);
}

double student_t_quantile(TailProbability p, double degrees_of_freedom) {
  require_tails(p, "student_t_quantile");
  require_positive_dof(degrees_of_freedom);
  const boost::math::students_t_distribution<double> dist(degrees_of_freedom);
  if (p.lower <= 0.5) return boost::math::quantile(dist, p.lower);
  return boost::math::quantile(boost::math::complement(dist, p.upper));
}

double chi_squared_quantile(double p, double degrees_of_freedom) {
  require_open_unit(p, "chi_squared_quantile");
  require_positive_dof(degrees_of_freedom);
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(degrees_of_freedom),
                               p);
}

}  // namespace recavar
