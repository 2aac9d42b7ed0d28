#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hetq/core/config.hpp"
#include "hetq/core/rate_distribution.hpp"

namespace hetq::staffing {

struct ErlangResult {
  double p_wait = 0.0;
  double mean_Q = 0.0;
  double mean_W = 0.0;
  double abandon_prob = 0.0;
};

/// M/M/N delay probability, mean queue and mean wait. UNSTABLE if lambda >= N mu.
ErlangResult erlang_c(std::size_t n, double lambda, double mu);

/// M/M/N+M with exponential patience of rate nu.
ErlangResult erlang_a(std::size_t n, double lambda, double mu, double nu);

/// Delay cost D(t) of one customer.
struct DelayCost {
  enum class Kind { Power, Custom };
  Kind kind = Kind::Power;
  double scale = 1.0;     // Power: D(t) = scale * t^exponent
  double exponent = 1.0;
  std::function<double(double)> custom;

  static DelayCost linear(double c) { return {Kind::Power, c, 1.0, {}}; }
  static DelayCost power(double c, double k) { return {Kind::Power, c, k, {}}; }
  static DelayCost from(std::function<double(double)> f) { return {Kind::Custom, 0.0, 0.0, std::move(f)}; }
};

/// G = (H - lambda) int_0^inf D(t) exp(-(H - lambda) t) dt. DOMAIN if H <= lambda.
double waiting_cost_G(double total_rate, double lambda, const DelayCost& delay);

struct CostSpec {
  /// Cost per server above lambda/mu_bar; used when `staffing_cost` is empty.
  double c_s = 1.0;
  /// Optional F as a function of excess servers N - lambda/mu_bar.
  std::function<double(double)> staffing_cost;
  DelayCost waiting = DelayCost::linear(1.0);
  /// Cost per abandonment.
  double d = 0.0;
  /// Fixed cost assigned to unstable systems; reported, never folded in.
  double C_un = 0.0;
  double nu = 0.0;
  /// Drift cutoff -beta >= stable_margin for the no-abandonment integral;
  /// negative selects mu_bar / sqrt(r), i.e. H - lambda >= mu_bar.
  double stable_margin = -1.0;
  std::size_t nodes = 128;
};

struct CostBreakdown {
  double total = 0.0;
  double staffing = 0.0;
  double variable = 0.0;
  /// P(beta < 0).
  double p_stable = 1.0;
  /// C_un * P(beta >= 0).
  double unstable_penalty = 0.0;
};

/// F(x) for safety coefficient x.
double staffing_cost(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                     const CostSpec& cost);

/// F(x) + lambda E[P(beta) G | beta < 0], beta ~ N(-x mu_bar, Var(mu)).
CostBreakdown cost_no_aband(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                            const CostSpec& cost);

/// F(x) + d nu sqrt(r) E_beta[E xi^+]. Costs are in customers per unit time.
CostBreakdown cost_aband(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                         const CostSpec& cost);

struct OptimizationResult {
  double x_star = 0.0;
  double cost_at_optimum = 0.0;
  std::vector<std::pair<double, double>> cost_curve;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double tol = 0.0;
  /// False when the sampled curve has an interior local maximum.
  bool unimodal = true;
  std::size_t evaluations = 0;
};

/// Golden-section minimum over [x_lo, x_hi] plus a 64-point curve; falls back
/// to grid-then-refine on non-unimodal curves.
OptimizationResult optimize_staffing(const std::function<double(double)>& cost_fn, double x_lo, double x_hi,
                                     double tol, std::size_t curve_points = 64);

}  // namespace hetq::staffing
