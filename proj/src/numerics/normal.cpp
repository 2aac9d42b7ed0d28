#include "hetq/numerics/normal.hpp"

#include <cmath>
#include <limits>

namespace hetq::numerics {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of K(u) = 1/(u + 1/(u + 2/(u + 3/(u + ...)))) = R(u).
// `skip` drops the leading `skip` levels: skip = 1 yields 1/(u + 2/(u + 3/...)).
double mills_fraction(double u, int skip) {
  const int first = skip + 1;
  double f = u;
  double c = u;
  double d = 0.0;
  for (int k = first; k < 5000; ++k) {
    const double a = static_cast<double>(k);
    d = u + a * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = u + a / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 / f;
}

}  // namespace

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double log_cdf(double x) {
  if (x > -20.0) return std::log(cdf(x));
  return log_pdf(x) + std::log(mills(-x));
}

double mills(double u) {
  if (u < 5.0) return cdf(-u) / pdf(u);
  return mills_fraction(u, 0);
}

double inverse_mills_excess(double u) {
  if (u < 5.0) return 1.0 / mills(u) - u;
  return mills_fraction(u, 1);
}

double inverse_mills(double t) {
  if (t > -5.0) return pdf(t) / cdf(t);
  return -t + inverse_mills_excess(-t);
}

double logistic_complement(double x) {
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace hetq::numerics
