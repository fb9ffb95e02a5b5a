#include <cmath>
#include <limits>
#include <string>

#include "jppo/channel.hpp"
#include "jppo/errors.hpp"

namespace jppo::channel {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
// exp() of anything below this is zero in double precision.
constexpr double kLogUnderflow = -746.0;

// Sum_{n>=0} x^n / ((a+1)(a+2)...(a+n)); P(a, x) = x^a e^-x / Gamma(a+1) * sum.
double lower_series_sum(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum;
  }
  throw NumericFailure("incomplete gamma series did not converge (a=" + std::to_string(a) +
                       ", x=" + std::to_string(x) + ")");
}

// Modified Lentz evaluation of the continued fraction
//   1 / (x+1-a - 1(1-a)/(x+3-a - 2(2-a)/(x+5-a - ...)))
// so that Gamma(a, x) = x^a e^-x * cf.
double upper_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericFailure("incomplete gamma continued fraction did not converge (a=" +
                       std::to_string(a) + ", x=" + std::to_string(x) + ")");
}

void check_domain(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma requires a > 0, got a=" + std::to_string(a));
  }
  if (!(x >= 0.0) || std::isnan(x)) {
    throw DomainError("incomplete gamma requires x >= 0, got x=" + std::to_string(x));
  }
}

}  // namespace

double regularized_upper_gamma(double a, double x) {
  check_domain(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) {
    const double p = std::exp(a * std::log(x) - x - std::lgamma(a + 1.0)) * lower_series_sum(a, x);
    return 1.0 - p;
  }
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (log_prefactor < kLogUnderflow) return 0.0;
  return std::exp(log_prefactor) * upper_continued_fraction(a, x);
}

double upper_incomplete_gamma(double a, double x) {
  check_domain(a, x);
  if (x == 0.0) return std::tgamma(a);
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return std::tgamma(a) * regularized_upper_gamma(a, x);
  const double log_prefactor = a * std::log(x) - x;
  if (log_prefactor < kLogUnderflow) return 0.0;
  return std::exp(log_prefactor) * upper_continued_fraction(a, x);
}

}  // namespace jppo::channel
