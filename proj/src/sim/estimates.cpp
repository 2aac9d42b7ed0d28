#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>

#include "hetq/core/text.hpp"
#include "hetq/error.hpp"
#include "hetq/sim/sim.hpp"

namespace hetq::sim {

SteadyEstimates steady_estimates(const PathRecord& path, double warmup_fraction, std::size_t batches) {
  require(warmup_fraction >= 0.0 && warmup_fraction < 1.0, ErrorCode::ConfigError,
          "key 'warmup': must lie in [0, 1)");
  require(path.samples() >= 2, ErrorCode::EmptyWindow, "path has fewer than two samples");
  const std::size_t last = path.samples() - 1;
  const double start = warmup_fraction * path.t[last];
  const auto j0 = static_cast<std::size_t>(std::lower_bound(path.t.begin(), path.t.end(), start) - path.t.begin());
  require(j0 < last && path.t[last] > path.t[j0], ErrorCode::EmptyWindow, "window after warmup is empty");
  require(path.events[last] > path.events[j0], ErrorCode::EmptyWindow, "no events after warmup");

  SteadyEstimates e;
  e.window_start = path.t[j0];
  e.window_end = path.t[last];
  const double span = e.window_end - e.window_start;
  e.arrivals = path.A[last] - path.A[j0];
  e.mean_Q = (path.area_Q[last] - path.area_Q[j0]) / span;
  e.p_full = (path.area_full[last] - path.area_full[j0]) / span;
  e.abandon_rate = static_cast<double>(path.R[last] - path.R[j0]) / span;
  const double sqrt_r = std::sqrt(path.r);
  e.scaled_X.reserve(last - j0 + 1);
  for (std::size_t j = j0; j <= last; ++j)
    e.scaled_X.push_back((static_cast<double>(path.X[j]) - static_cast<double>(path.n)) / sqrt_r);

  if (e.arrivals > 0) {
    e.p_wait = static_cast<double>(path.delayed[last] - path.delayed[j0]) / static_cast<double>(e.arrivals);
  } else {
    std::size_t positive = 0;
    for (std::size_t j = j0; j <= last; ++j) positive += path.Q[j] > 0;
    e.p_wait = static_cast<double>(positive) / static_cast<double>(last - j0 + 1);
  }

  const std::size_t b = std::min(batches, last - j0);
  if (b >= 2) {
    double ss_q = 0.0, mean_q = 0.0, ss_p = 0.0;
    std::vector<double> qs;
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t lo = j0 + (last - j0) * i / b, hi = j0 + (last - j0) * (i + 1) / b;
      const double len = path.t[hi] - path.t[lo];
      qs.push_back((path.area_Q[hi] - path.area_Q[lo]) / len);
      mean_q += qs.back() / static_cast<double>(b);
      // Ratio estimator residual for the arrival-weighted delay fraction.
      const double d = static_cast<double>(path.delayed[hi] - path.delayed[lo]);
      const double a = static_cast<double>(path.A[hi] - path.A[lo]);
      ss_p += (d - e.p_wait * a) * (d - e.p_wait * a);
    }
    for (double q : qs) ss_q += (q - mean_q) * (q - mean_q);
    const double bb = static_cast<double>(b);
    e.mean_Q_se = std::sqrt(ss_q / (bb - 1.0) / bb);
    if (e.arrivals > 0) e.p_wait_se = std::sqrt(ss_p * bb / (bb - 1.0)) / static_cast<double>(e.arrivals);
  }
  return e;
}

core::RngStream replication_stream(std::uint64_t seed, std::size_t index) {
  return core::RngStream(seed).split(static_cast<std::uint64_t>(index));
}

std::size_t default_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HETQ_THREADS"); env != nullptr && *env != '\0') {
    const auto cap = core::parse_int(env, "HETQ_THREADS");
    require(cap >= 1, ErrorCode::ConfigError, "HETQ_THREADS must be >= 1");
    n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t k = std::min(threads == 0 ? default_threads() : threads, std::max<std::size_t>(count, 1));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < k; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Replication> replicate(const core::SystemConfig& config, const RunOptions& options, std::size_t n_reps,
                                   double warmup_fraction, std::size_t threads) {
  require(n_reps >= 1, ErrorCode::ConfigError, "key 'reps': need at least one replication");
  std::vector<Replication> out(n_reps);
  parallel_for(n_reps, threads, [&](std::size_t i) {
    core::SystemConfig cfg = config;
    cfg.seed = replication_stream(config.seed, i).key();
    core::RngStream root(cfg.seed);
    const auto system = core::realize(cfg, root);
    const auto path = run(cfg, system, options);
    out[i].index = i;
    out[i].zeta_hat = system.zeta_hat;
    out[i].sum_mu = system.sum_mu;
    out[i].n = system.n;
    out[i].status = path.status;
    out[i].estimates = steady_estimates(path, warmup_fraction);
  });
  return out;
}

ChainEstimates birth_death_estimates(std::size_t n, double lambda, double mu, double nu, double horizon,
                                     double warmup, core::RngStream& stream, std::size_t batches) {
  require(n >= 1 && lambda > 0.0 && mu > 0.0 && nu >= 0.0, ErrorCode::ConfigError,
          "birth-death chain needs N >= 1, lambda > 0, mu > 0, nu >= 0");
  require(nu > 0.0 || lambda < static_cast<double>(n) * mu, ErrorCode::Unstable, "lambda >= N mu without abandonment");
  require(horizon > warmup && warmup >= 0.0 && batches >= 2, ErrorCode::ConfigError, "invalid chain window");
  const auto nn = static_cast<std::int64_t>(n);
  const double batch_len = (horizon - warmup) / static_cast<double>(batches);
  std::vector<double> full(batches, 0.0), queue(batches, 0.0), length(batches, 0.0);

  ChainEstimates out;
  std::int64_t x = nn;
  double t = 0.0;
  while (t < horizon) {
    const double down = static_cast<double>(std::min(x, nn)) * mu + static_cast<double>(std::max<std::int64_t>(x - nn, 0)) * nu;
    const double total = lambda + down;
    const double hold = 1.0 / total;
    if (t >= warmup) {
      const auto b = std::min(batches - 1, static_cast<std::size_t>((t - warmup) / batch_len));
      length[b] += hold;
      if (x >= nn) full[b] += hold;
      queue[b] += static_cast<double>(std::max<std::int64_t>(x - nn, 0)) * hold;
    }
    t += hold;
    x += stream.uniform() * total < lambda ? 1 : -1;
    ++out.jumps;
  }

  double tot_len = 0.0, tot_full = 0.0, tot_q = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    tot_len += length[b];
    tot_full += full[b];
    tot_q += queue[b];
  }
  out.p_wait = tot_full / tot_len;
  out.mean_Q = tot_q / tot_len;
  double ss_p = 0.0, ss_q = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    ss_p += std::pow(full[b] - out.p_wait * length[b], 2);
    ss_q += std::pow(queue[b] - out.mean_Q * length[b], 2);
  }
  const double bb = static_cast<double>(batches);
  out.p_wait_se = std::sqrt(ss_p * bb / (bb - 1.0)) / tot_len;
  out.mean_Q_se = std::sqrt(ss_q * bb / (bb - 1.0)) / tot_len;
  return out;
}

}  // namespace hetq::sim
