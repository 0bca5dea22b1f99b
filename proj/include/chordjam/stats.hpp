#pragma once

#include <span>
#include <stdexcept>

namespace chordjam::stats {

class DegenerateSample : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_upper_tail(double t, double df);

struct TTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value_one_sided = 1.0;
};

/// Paired test of H1: mean(a - b) > 0. Throws DegenerateSample when all
/// differences are equal (zero variance).
TTestResult paired_t_test_one_sided(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

}  // namespace chordjam::stats
