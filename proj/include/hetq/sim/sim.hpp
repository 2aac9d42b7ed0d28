#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetq/core/config.hpp"
#include "hetq/core/random.hpp"

namespace hetq::sim {

struct RunOptions {
  double horizon = 1000.0;
  core::AbandonMode mode = core::AbandonMode::None;
  /// Uniform sample grid over [0, horizon], endpoints included.
  std::size_t grid_points = 10000;
  /// X(0); defaults to N (all busy, empty queue).
  std::optional<std::size_t> initial_X;
  std::size_t queue_cap = 1000000;
  /// Per-server idle indicators at sample times.
  bool record_servers = false;
  /// (arrival time, wait) of every customer that reaches a server.
  bool record_waits = true;
  /// Assert state invariants after every event (slow).
  bool check_invariants = false;
};

enum class RunStatus { Ok, Overflow };

/// Sampled trajectory plus exact counters of one run.
struct PathRecord {
  std::size_t n = 0;
  double r = 1.0;
  double lambda = 0.0;
  double nu = 0.0;
  std::uint64_t seed = 0;
  core::Policy policy = core::Policy::LISF;
  core::AbandonMode mode = core::AbandonMode::None;
  RunStatus status = RunStatus::Ok;
  double end_time = 0.0;
  std::int64_t initial_X = 0;

  std::vector<double> rates;
  std::vector<std::size_t> pool_of;
  std::vector<double> pool_rates;
  std::vector<std::size_t> pool_sizes;

  // Grid samples: state right after all events at or before t.
  std::vector<double> t;
  std::vector<std::int64_t> X;
  std::vector<std::int64_t> Q;
  /// Z[i][j]: busy servers of pool i at sample j.
  std::vector<std::vector<std::int64_t>> Z;
  std::vector<std::int64_t> R;
  std::vector<std::int64_t> A;
  /// Cumulative counts and time integrals at sample times.
  std::vector<std::int64_t> delayed;
  std::vector<std::int64_t> departures;
  std::vector<double> area_Q;
  std::vector<double> area_full;
  std::vector<std::uint64_t> events;
  /// idle[j * n + k] = 1 if server k is idle at sample j.
  std::vector<std::uint8_t> idle;

  std::vector<std::pair<double, double>> waits;

  // Exact totals at end_time.
  std::int64_t total_arrivals = 0;
  std::int64_t total_abandonments = 0;
  std::vector<std::int64_t> server_departures;
  std::vector<double> busy_time;

  std::size_t samples() const { return t.size(); }
  std::size_t pool_count() const { return Z.size(); }
};

/// Simulates one path of the system. CONFIG_ERROR if an abandonment mode is
/// set with nu = 0. An exceeded queue cap ends the run with status Overflow.
PathRecord run(const core::SystemConfig& config, const core::RealizedSystem& system, const RunOptions& options);

struct SteadyEstimates {
  double window_start = 0.0;
  double window_end = 0.0;
  /// Fraction of window arrivals that found no idle server.
  double p_wait = 0.0;
  double p_wait_se = 0.0;
  /// Exact time average of Q.
  double mean_Q = 0.0;
  double mean_Q_se = 0.0;
  /// Time fraction with no idle server.
  double p_full = 0.0;
  double abandon_rate = 0.0;
  std::int64_t arrivals = 0;
  /// (X - N) / sqrt(r) at window sample times.
  std::vector<double> scaled_X;
};

/// Window estimates over [warmup * T, T] aligned to the sample grid; standard
/// errors from 20 batch means. EMPTY_WINDOW if the window holds no events.
SteadyEstimates steady_estimates(const PathRecord& path, double warmup_fraction, std::size_t batches = 20);

struct Replication {
  std::size_t index = 0;
  double zeta_hat = 0.0;
  double sum_mu = 0.0;
  std::size_t n = 0;
  RunStatus status = RunStatus::Ok;
  SteadyEstimates estimates;
};

/// Stream of replication i: RngStream(config.seed).split(i).
core::RngStream replication_stream(std::uint64_t seed, std::size_t index);

/// n_reps independent runs with fresh rate draws; results indexed by
/// replication regardless of scheduling. Threads are capped by HETQ_THREADS.
std::vector<Replication> replicate(const core::SystemConfig& config, const RunOptions& options, std::size_t n_reps,
                                   double warmup_fraction, std::size_t threads = 0);

/// Runs body(0..count-1) on up to `threads` workers (0 = default_threads()).
/// The first exception in index order is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Worker count: HETQ_THREADS if set, else hardware concurrency, at least 1.
std::size_t default_threads();

struct CoupledPoint {
  double t;
  std::int64_t d_hom;
  std::int64_t d_het;
};

struct CoupledPath {
  double q_rate = 0.0;
  double p_rate = 0.0;
  std::vector<CoupledPoint> points;
  std::int64_t arrivals = 0;
  bool ordered() const;
};

/// Homogeneous (rate p) and heterogeneous systems driven by common arrivals
/// and one rate-N*q Poisson skeleton thinned with shared uniforms. Records
/// both departure counts at every skeleton point. CONFIG_ERROR if p_rate
/// exceeds the slowest server or nu > 0. Both systems start from X(0)
/// (default N). A positive `max_skeleton_events` stops after that many points.
CoupledPath coupled_run(const core::SystemConfig& config, double p_rate, const core::RealizedSystem& system,
                        double horizon, std::size_t max_skeleton_events = 0,
                        std::optional<std::size_t> initial_X = std::nullopt);

/// Exchangeable-server fast path for homogeneous rates and Poisson arrivals:
/// simulates the birth-death chain of X with conditional (expected) holding
/// times. Returns the time-stationary estimates over [warmup, horizon].
struct ChainEstimates {
  double p_wait = 0.0;
  double p_wait_se = 0.0;
  double mean_Q = 0.0;
  double mean_Q_se = 0.0;
  std::uint64_t jumps = 0;
};
ChainEstimates birth_death_estimates(std::size_t n, double lambda, double mu, double nu, double horizon,
                                     double warmup, core::RngStream& stream, std::size_t batches = 20);

/// Path CSV: header t,X,Q,Z_1..Z_I,R,A.
std::string path_csv(const PathRecord& path);
/// JSON summary: counts, estimates, realized rates, seed.
std::string path_summary_json(const PathRecord& path, const SteadyEstimates& estimates);

}  // namespace hetq::sim
