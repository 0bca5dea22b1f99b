#include "chordjam/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace chordjam::stats {

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete beta needs x in [0,1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw std::domain_error("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("sample standard deviation needs n >= 2");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

TTestResult paired_t_test_one_sided(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal-length samples");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least 2 pairs");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const bool constant = std::all_of(diff.begin(), diff.end(), [&](double d) { return d == diff.front(); });
  const double sd = sample_sd(diff);
  if (constant || !(sd > 0.0)) throw DegenerateSample("paired differences have zero variance");
  const double n = static_cast<double>(diff.size());
  TTestResult r;
  r.t_statistic = mean(diff) / (sd / std::sqrt(n));
  r.degrees_of_freedom = static_cast<int>(diff.size()) - 1;
  r.p_value_one_sided = student_t_upper_tail(r.t_statistic, r.degrees_of_freedom);
  return r;
}

}  // namespace chordjam::stats
