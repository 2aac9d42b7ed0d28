#include <cmath>
#include <limits>

#include "hetq/diffusion/diffusion.hpp"
#include "hetq/error.hpp"
#include "hetq/numerics/normal.hpp"
#include "hetq/numerics/quadrature.hpp"
#include "hetq/staffing/staffing.hpp"

namespace hetq::staffing {

double waiting_cost_G(double total_rate, double lambda, const DelayCost& delay) {
  const double slack = total_rate - lambda;
  require(slack > 0.0, ErrorCode::Domain, "waiting_cost_G requires H > lambda");
  if (delay.kind == DelayCost::Kind::Power) {
    if (delay.scale == 0.0) return 0.0;
    return delay.scale * std::tgamma(delay.exponent + 1.0) / std::pow(slack, delay.exponent);
  }
  // Substituting s = slack t leaves int_0^inf D(s / slack) e^{-s} ds.
  const auto& rule = numerics::gauss_laguerre(64);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * delay.custom(rule.nodes[i] / slack);
  return sum;
}

namespace {

struct Context {
  double lambda, r, mu_bar, sd, sigma, gamma;
};

Context context(const core::SystemConfig& config, const core::RateDistribution& dist) {
  const auto m = core::rate_moments(dist);
  return {config.lambda_r,
          config.r,
          m.mean,
          std::sqrt(m.variance),
          diffusion::diffusion_sigma(m.mean, config.arrival_scv),
          diffusion::idleness_gamma(m, config.policy)};
}

}  // namespace

double staffing_cost(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                     const CostSpec& cost) {
  const double excess = x * std::sqrt(config.lambda_r / dist.mean());
  return cost.staffing_cost ? cost.staffing_cost(excess) : cost.c_s * excess;
}

CostBreakdown cost_no_aband(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                            const CostSpec& cost) {
  require(x > 0.0, ErrorCode::Domain, "safety coefficient x must be positive");
  const Context c = context(config, dist);
  const double sqrt_r = std::sqrt(c.r);
  const double mean = -x * c.mu_bar;
  const double margin = cost.stable_margin >= 0.0 ? cost.stable_margin : c.mu_bar / sqrt_r;

  auto term = [&](double beta) {
    const double p = diffusion::prob_wait_no_aband(beta, c.sigma, c.gamma);
    return p * waiting_cost_G(c.lambda - beta * sqrt_r, c.lambda, cost.waiting);
  };

  CostBreakdown out;
  out.staffing = staffing_cost(x, config, dist, cost);
  if (c.sd == 0.0) {
    out.p_stable = 1.0;
    out.variable = c.lambda * term(mean);
  } else {
    out.p_stable = numerics::cdf(-mean / c.sd);
    require(out.p_stable >= 1e-12, ErrorCode::Degenerate, "P(beta < 0) below 1e-12; x too small for the rate spread");
    const double lo = mean - 10.0 * c.sd;
    const double hi = -margin;
    double integral = 0.0;
    if (hi > lo) {
      // Four equal panels keep the rule well inside the normal bulk.
      const int panels = 4;
      const double width = (hi - lo) / panels;
      for (int k = 0; k < panels; ++k) {
        const double a = lo + k * width;
        integral += numerics::integrate(
            [&](double beta) { return numerics::pdf((beta - mean) / c.sd) / c.sd * term(beta); }, a, a + width,
            cost.nodes);
      }
    }
    out.variable = c.lambda * integral / out.p_stable;
  }
  out.unstable_penalty = cost.C_un * (1.0 - out.p_stable);
  out.total = out.staffing + out.variable;
  return out;
}

CostBreakdown cost_aband(double x, const core::SystemConfig& config, const core::RateDistribution& dist,
                         const CostSpec& cost) {
  require(x > 0.0, ErrorCode::Domain, "safety coefficient x must be positive");
  require(cost.nu > 0.0, ErrorCode::Domain, "cost_aband requires nu > 0");
  const Context c = context(config, dist);
  const double mean = -x * c.mu_bar;
  auto inner = [&](double beta) { return diffusion::expected_positive_part({c.sigma, beta, c.gamma, cost.nu}); };
  const double e = c.sd == 0.0 ? inner(mean) : numerics::normal_expectation(inner, mean, c.sd, cost.nodes);

  CostBreakdown out;
  out.staffing = staffing_cost(x, config, dist, cost);
  out.variable = cost.d * cost.nu * std::sqrt(c.r) * e;
  out.p_stable = c.sd == 0.0 ? 1.0 : numerics::cdf(-mean / c.sd);
  out.total = out.staffing + out.variable;
  return out;
}

}  // namespace hetq::staffing
