#pragma once

#include <cstddef>
#include <vector>

#include "hetq/core/config.hpp"
#include "hetq/core/random.hpp"
#include "hetq/core/rate_distribution.hpp"

namespace hetq::diffusion {

/// Coefficients of the limiting diffusion
///   xi(t) = xi(0) + sigma w(t) + beta t + gamma int xi^- ds - nu int xi^+ ds.
struct DiffusionParams {
  double sigma = 1.0;
  double beta = -1.0;
  double gamma = 1.0;
  double nu = 0.0;

  /// Throws DOMAIN unless sigma > 0, gamma > 0, nu >= 0 and (nu > 0 or beta < 0).
  void validate() const;
};

/// sigma^2 = mu_bar (C^2 + 1).
double diffusion_sigma(double mu_bar, double arrival_scv);

/// Idleness coefficient gamma for a routing policy: E[mu^2]/E[mu] for LISF
/// and RANDOM, the support infimum for FSF.
double idleness_gamma(const core::RateMoments& moments, core::Policy policy);

/// Stationary law of xi: weight varrho on a density over [0, inf) and
/// 1 - varrho on a normal conditioned to (-inf, 0).
struct SteadyStateDensity {
  enum class Upper { Exponential, TruncatedNormal };

  double varrho = 0.0;
  /// 1 - varrho, carried separately to keep relative accuracy near varrho = 1.
  double varrho_complement = 1.0;
  Upper upper_kind = Upper::Exponential;
  double upper_rate = 0.0;  // Exponential
  double upper_mean = 0.0;  // TruncatedNormal, before conditioning
  double upper_sd = 0.0;
  double lower_mean = 0.0;  // before conditioning
  double lower_sd = 0.0;

  /// Conditional densities of each piece, zero off their half-lines.
  double upper_pdf(double x) const { return x >= 0.0 ? upper_density(x) : 0.0; }
  double lower_pdf(double x) const { return x < 0.0 ? lower_density(x) : 0.0; }
  /// The same formulas without the support cut.
  double upper_density(double x) const;
  double lower_density(double x) const;
  /// Mixture density.
  double pdf(double x) const;
  /// One-sided limits of pdf at 0.
  double left_limit() const { return varrho_complement * lower_density(0.0); }
  double right_limit() const { return varrho * upper_density(0.0); }
  /// E[xi^+] = varrho E[xi | xi >= 0].
  double mean_positive_part() const;
  double cdf(double x) const;
};

/// P(xi >= 0) without abandonment. DOMAIN if beta >= 0.
double prob_wait_no_aband(double beta, double sigma, double gamma);
SteadyStateDensity stationary_no_aband(const DiffusionParams& params);

/// P(xi >= 0) with abandonment rate nu > 0.
double prob_wait_aband(double beta, double sigma, double gamma, double nu);
SteadyStateDensity stationary_aband(const DiffusionParams& params);

/// Dispatches on nu.
SteadyStateDensity stationary(const DiffusionParams& params);

/// E[xi^+] in closed form.
double expected_positive_part(const DiffusionParams& params);

/// Expected scaled queue length for uniform(mu_bar - eps, mu_bar + eps) rates:
/// E over beta ~ N(-theta mu_bar, eps^2/3) of expected_positive_part, with
/// gamma from the routing policy. `nodes` selects the Hermite rule.
double ql_eps(double eps, double mu_bar, double sigma, double theta, double nu, core::Policy policy,
              std::size_t nodes = 128);

struct SdePath {
  double step = 0.0;
  std::size_t stride = 1;
  /// xi at times k * stride * step.
  std::vector<double> values;
};

/// Explicit Euler-Maruyama path of xi, recording every `stride`-th step.
SdePath simulate_sde(const DiffusionParams& params, double x0, double horizon, double step, core::RngStream& stream,
                     std::size_t stride = 1);

}  // namespace hetq::diffusion
