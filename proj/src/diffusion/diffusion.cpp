#include "hetq/diffusion/diffusion.hpp"

#include <cmath>

#include "hetq/error.hpp"
#include "hetq/numerics/normal.hpp"
#include "hetq/numerics/quadrature.hpp"

namespace hetq::diffusion {

using numerics::kSqrt2;

void DiffusionParams::validate() const {
  require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::Domain, "sigma must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, ErrorCode::Domain, "gamma must be positive");
  require(std::isfinite(nu) && nu >= 0.0, ErrorCode::Domain, "nu must be nonnegative");
  require(std::isfinite(beta), ErrorCode::Domain, "beta must be finite");
  require(nu > 0.0 || beta < 0.0, ErrorCode::Domain, "no stationary law without abandonment unless beta < 0");
}

double diffusion_sigma(double mu_bar, double arrival_scv) { return std::sqrt(mu_bar * (arrival_scv + 1.0)); }

double idleness_gamma(const core::RateMoments& moments, core::Policy policy) {
  return policy == core::Policy::FSF ? moments.gamma_fsf : moments.gamma_lisf;
}

double SteadyStateDensity::upper_density(double x) const {
  if (upper_kind == Upper::Exponential) return upper_rate * std::exp(-upper_rate * x);
  const double z = (x - upper_mean) / upper_sd;
  return std::exp(numerics::log_pdf(z) - numerics::log_cdf(upper_mean / upper_sd)) / upper_sd;
}

double SteadyStateDensity::lower_density(double x) const {
  const double z = (x - lower_mean) / lower_sd;
  return std::exp(numerics::log_pdf(z) - numerics::log_cdf(-lower_mean / lower_sd)) / lower_sd;
}

double SteadyStateDensity::pdf(double x) const {
  return x >= 0.0 ? varrho * upper_pdf(x) : varrho_complement * lower_pdf(x);
}

double SteadyStateDensity::mean_positive_part() const {
  if (upper_kind == Upper::Exponential) return varrho / upper_rate;
  const double t = upper_mean / upper_sd;
  const double conditional = t >= 0.0 ? upper_sd * (t + numerics::inverse_mills(t))
                                      : upper_sd * numerics::inverse_mills_excess(-t);
  return varrho * conditional;
}

double SteadyStateDensity::cdf(double x) const {
  if (x < 0.0) {
    const double num = numerics::log_cdf((x - lower_mean) / lower_sd);
    const double den = numerics::log_cdf(-lower_mean / lower_sd);
    return varrho_complement * std::exp(num - den);
  }
  double tail = 0.0;
  if (upper_kind == Upper::Exponential) {
    tail = std::exp(-upper_rate * x);
  } else {
    const double num = numerics::log_cdf(-(x - upper_mean) / upper_sd);
    const double den = numerics::log_cdf(upper_mean / upper_sd);
    tail = std::exp(num - den);
  }
  return 1.0 - varrho * tail;
}

namespace {

// (1 - varrho) / varrho without abandonment.
double odds_no_aband(double beta, double sigma, double gamma) {
  require(beta < 0.0, ErrorCode::Domain, "beta must be negative without abandonment");
  require(sigma > 0.0 && gamma > 0.0, ErrorCode::Domain, "sigma and gamma must be positive");
  // z = -sqrt(2) beta / (sqrt(gamma) sigma) > 0; odds = z cdf(z) / pdf(z).
  const double z = -kSqrt2 * beta / (std::sqrt(gamma) * sigma);
  return z / numerics::inverse_mills(z);
}

// log((1 - varrho) / varrho) with abandonment.
double log_odds_aband(double beta, double sigma, double gamma, double nu) {
  require(nu > 0.0 && gamma > 0.0 && sigma > 0.0, ErrorCode::Domain, "nu, gamma and sigma must be positive");
  const double a_nu = kSqrt2 * beta / (std::sqrt(nu) * sigma);
  const double a_gamma = kSqrt2 * beta / (std::sqrt(gamma) * sigma);
  return 0.5 * std::log(nu / gamma) + numerics::log_pdf(-a_nu) - numerics::log_pdf(-a_gamma) +
         numerics::log_cdf(-a_gamma) - numerics::log_cdf(a_nu);
}

}  // namespace

double prob_wait_no_aband(double beta, double sigma, double gamma) {
  return 1.0 / (1.0 + odds_no_aband(beta, sigma, gamma));
}

SteadyStateDensity stationary_no_aband(const DiffusionParams& params) {
  params.validate();
  require(params.nu == 0.0, ErrorCode::Domain, "stationary_no_aband requires nu = 0");
  SteadyStateDensity d;
  const double odds = odds_no_aband(params.beta, params.sigma, params.gamma);
  d.varrho = 1.0 / (1.0 + odds);
  d.varrho_complement = std::isinf(odds) ? 1.0 : odds / (1.0 + odds);
  d.upper_kind = SteadyStateDensity::Upper::Exponential;
  d.upper_rate = -2.0 * params.beta / (params.sigma * params.sigma);
  d.lower_mean = params.beta / params.gamma;
  d.lower_sd = params.sigma / std::sqrt(2.0 * params.gamma);
  return d;
}

double prob_wait_aband(double beta, double sigma, double gamma, double nu) {
  return numerics::logistic_complement(log_odds_aband(beta, sigma, gamma, nu));
}

SteadyStateDensity stationary_aband(const DiffusionParams& params) {
  params.validate();
  require(params.nu > 0.0, ErrorCode::Domain, "stationary_aband requires nu > 0");
  SteadyStateDensity d;
  const double log_odds = log_odds_aband(params.beta, params.sigma, params.gamma, params.nu);
  d.varrho = numerics::logistic_complement(log_odds);
  d.varrho_complement = numerics::logistic_complement(-log_odds);
  d.upper_kind = SteadyStateDensity::Upper::TruncatedNormal;
  d.upper_mean = params.beta / params.nu;
  d.upper_sd = params.sigma / std::sqrt(2.0 * params.nu);
  d.lower_mean = params.beta / params.gamma;
  d.lower_sd = params.sigma / std::sqrt(2.0 * params.gamma);
  return d;
}

SteadyStateDensity stationary(const DiffusionParams& params) {
  return params.nu > 0.0 ? stationary_aband(params) : stationary_no_aband(params);
}

double expected_positive_part(const DiffusionParams& params) { return stationary(params).mean_positive_part(); }

double ql_eps(double eps, double mu_bar, double sigma, double theta, double nu, core::Policy policy,
              std::size_t nodes) {
  require(mu_bar > 0.0, ErrorCode::Domain, "mu_bar must be positive");
  require(eps >= 0.0 && eps < mu_bar, ErrorCode::Domain, "eps must lie in [0, mu_bar)");
  require(nu > 0.0, ErrorCode::Domain, "nu must be positive");
  require(theta > 0.0, ErrorCode::Domain, "theta must be positive");
  const double var = eps * eps / 3.0;
  const double gamma = policy == core::Policy::FSF ? mu_bar - eps : mu_bar + var / mu_bar;
  auto inner = [&](double beta) { return expected_positive_part({sigma, beta, gamma, nu}); };
  if (eps == 0.0) return inner(-theta * mu_bar);
  return numerics::normal_expectation(inner, -theta * mu_bar, std::sqrt(var), nodes);
}

SdePath simulate_sde(const DiffusionParams& params, double x0, double horizon, double step, core::RngStream& stream,
                     std::size_t stride) {
  require(step > 0.0, ErrorCode::Domain, "step must be positive");
  require(horizon >= 0.0, ErrorCode::Domain, "horizon must be nonnegative");
  require(stride >= 1, ErrorCode::Domain, "stride must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  const double noise = params.sigma * std::sqrt(step);
  SdePath path;
  path.step = step;
  path.stride = stride;
  path.values.reserve(steps / stride + 1);
  double xi = x0;
  path.values.push_back(xi);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double drift = params.beta + params.gamma * std::max(-xi, 0.0) - params.nu * std::max(xi, 0.0);
    xi += drift * step + (noise > 0.0 ? noise * stream.normal() : 0.0);
    if (k % stride == 0) path.values.push_back(xi);
  }
  return path;
}

}  // namespace hetq::diffusion
