#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hetq/core/random.hpp"

namespace hetq::core {

struct Atom {
  double rate;
  double probability;
};

/// Law of the i.i.d. server rates, supported on [lower(), upper()].
class RateDistribution {
 public:
  enum class Kind { Uniform, Discrete, Point };

  static RateDistribution uniform(double lo, double hi);
  static RateDistribution discrete(std::vector<Atom> atoms);
  static RateDistribution point(double rate);

  /// Parses `uniform(lo,hi)`, `point(x)` or `discrete(x1:p1,x2:p2,...)`.
  static RateDistribution parse(const std::string& text);

  Kind kind() const noexcept { return kind_; }
  double lower() const noexcept { return lo_; }
  double upper() const noexcept { return hi_; }
  /// Atoms sorted by rate; empty for the uniform law.
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double mean() const noexcept { return mean_; }
  double second_moment() const noexcept { return second_; }
  double variance() const noexcept { return second_ - mean_ * mean_; }

  /// m([a,b]) and the first moment restricted to [a,b].
  double mass(double a, double b) const;
  double first_moment(double a, double b) const;

  double sample(RngStream& stream) const;

  std::string to_string() const;

 private:
  RateDistribution(Kind kind, double lo, double hi, std::vector<Atom> atoms);

  Kind kind_;
  double lo_;
  double hi_;
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
  double second_ = 0.0;
};

struct RateMoments {
  double mean;
  double variance;
  double second_moment;
  /// E[mu^2] / E[mu]; idleness coefficient under longest-idle-first routing.
  double gamma_lisf;
  /// Support infimum; idleness coefficient under fastest-first routing.
  double gamma_fsf;
};

RateMoments rate_moments(const RateDistribution& dist);

/// N i.i.d. draws from `dist`.
std::vector<double> sample_rates(const RateDistribution& dist, std::size_t n, RngStream& stream);

}  // namespace hetq::core
