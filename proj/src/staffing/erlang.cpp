#include <algorithm>
#include <cmath>
#include <vector>

#include "hetq/error.hpp"
#include "hetq/staffing/staffing.hpp"

namespace hetq::staffing {

ErlangResult erlang_c(std::size_t n, double lambda, double mu) {
  require(n >= 1 && mu > 0.0 && lambda >= 0.0, ErrorCode::Domain, "erlang_c needs N >= 1, mu > 0, lambda >= 0");
  const double a = lambda / mu;
  const double nn = static_cast<double>(n);
  require(a < nn, ErrorCode::Unstable, "lambda >= N mu");
  double b = 1.0;
  for (std::size_t k = 1; k <= n; ++k) b = a * b / (static_cast<double>(k) + a * b);
  const double rho = a / nn;
  ErlangResult out;
  out.p_wait = b / (1.0 - rho * (1.0 - b));
  out.mean_Q = out.p_wait * rho / (1.0 - rho);
  out.mean_W = lambda > 0.0 ? out.mean_Q / lambda : 0.0;
  return out;
}

ErlangResult erlang_a(std::size_t n, double lambda, double mu, double nu) {
  require(n >= 1 && lambda > 0.0 && mu > 0.0 && nu > 0.0, ErrorCode::Domain,
          "erlang_a needs N >= 1 and positive rates");
  const double nn = static_cast<double>(n);
  const double log_lambda = std::log(lambda);
  // log pi_j up to a constant: j log(lambda/mu) - log j! below N, then
  // lambda / (N mu + (j - N) nu) factors above.
  std::vector<double> logw;
  logw.reserve(n + 64);
  const double log_a = std::log(lambda / mu);
  for (std::size_t j = 0; j <= n; ++j) logw.push_back(static_cast<double>(j) * log_a - std::lgamma(j + 1.0));
  double peak = *std::max_element(logw.begin(), logw.end());
  for (std::size_t k = 1;; ++k) {
    const double next = logw.back() + log_lambda - std::log(nn * mu + static_cast<double>(k) * nu);
    logw.push_back(next);
    peak = std::max(peak, next);
    // Tail ratio lambda / (N mu + k nu) < 1/2 past this point; stop once negligible.
    if (next < peak - 60.0 && lambda < 0.5 * (nn * mu + static_cast<double>(k) * nu)) break;
  }
  double total = 0.0, waiting = 0.0, queue = 0.0;
  for (std::size_t j = 0; j < logw.size(); ++j) {
    const double w = std::exp(logw[j] - peak);
    total += w;
    if (j >= n) {
      waiting += w;
      queue += static_cast<double>(j - n) * w;
    }
  }
  ErlangResult out;
  out.p_wait = waiting / total;
  out.mean_Q = queue / total;
  out.abandon_prob = nu * out.mean_Q / lambda;
  out.mean_W = out.mean_Q / lambda;
  return out;
}

}  // namespace hetq::staffing
