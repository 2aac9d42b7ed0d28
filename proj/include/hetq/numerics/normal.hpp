#pragma once

namespace hetq::numerics {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2 = 1.41421356237309504880;

/// Standard normal density.
double pdf(double x);
double log_pdf(double x);

/// Standard normal distribution function, accurate in both tails.
double cdf(double x);
/// log cdf(x); finite far into the lower tail.
double log_cdf(double x);

/// Mills ratio R(u) = cdf(-u) / pdf(u).
double mills(double u);

/// 1/R(u) - u, the inverse-Mills excess. Stays accurate for large u, where
/// the naive difference cancels.
double inverse_mills_excess(double u);

/// pdf(t) / cdf(t) for any t.
double inverse_mills(double t);

/// 1 / (1 + exp(x)) without overflow.
double logistic_complement(double x);

}  // namespace hetq::numerics
