#pragma once

#include <cstddef>
#include <vector>

#include "hetq/core/config.hpp"
#include "hetq/core/rate_distribution.hpp"
#include "hetq/sim/sim.hpp"

namespace hetq::ssc {

/// Pool structure of an inverted-V system and its SSC coefficient.
struct SSCFunctionSpec {
  std::vector<double> beta;
  std::vector<double> mu;
  /// sum beta_l mu_l^2 / sum beta_l mu_l
  double gamma_I = 0.0;

  /// Validates fractions and strictly increasing rates, computes gamma_I.
  static SSCFunctionSpec make(std::vector<double> beta, std::vector<double> mu);
  /// As make(), then checks a supplied gamma_I against the recomputed value.
  static SSCFunctionSpec make(std::vector<double> beta, std::vector<double> mu, double gamma_I);
  static SSCFunctionSpec from(const core::SystemConfig& config);

  std::size_t pools() const { return mu.size(); }
};

/// |sum_i z_i (mu_i - gamma_I)|. Homogeneous of degree 1; q does not enter.
double ssc_g(const SSCFunctionSpec& spec, double q, const std::vector<double>& z);

struct HydroScaledPath {
  double r = 0.0;
  std::size_t m = 0;
  double x_rm = 0.0;
  /// Window start m / sqrt(|N|) and time stretch sqrt(x_rm) / |N|.
  double start = 0.0;
  double stretch = 0.0;
  std::vector<double> t;
  std::vector<double> Q;
  /// Z[i][j] = (Z_i - N_i) / sqrt(x_rm)
  std::vector<std::vector<double>> Z;
};

/// Hydrodynamic window m of length L over the path's sample grid. Samples are
/// the grid points falling inside the window, plus its left end.
/// WINDOW_ERROR if the path ends before the window does.
HydroScaledPath hydro_scale(const sim::PathRecord& path, double r, std::size_t m, double L);

/// Sup norms over sample times t <= T of g and |Z_hat| under diffusive scaling
/// Q / sqrt(|N|), (Z_i - N_i) / sqrt(|N|).
struct SupNorms {
  double g = 0.0;
  double z = 0.0;
  double ratio = 0.0;
};
SupNorms ssc_sup_norms(const SSCFunctionSpec& spec, const sim::PathRecord& path, double T);

struct SSCRow {
  double r = 0.0;
  std::size_t rep = 0;
  double g_supnorm = 0.0;
  double z_supnorm = 0.0;
  double ratio = 0.0;
};

struct SSCSummary {
  double r = 0.0;
  double median_ratio = 0.0;
  double q1_ratio = 0.0;
  double q3_ratio = 0.0;
  double median_g = 0.0;
  double median_z = 0.0;
};

struct SSCTable {
  std::vector<SSCRow> rows;
  std::vector<SSCSummary> summary;
};

struct SSCOptions {
  double T = 10.0;
  std::size_t reps = 30;
  std::size_t grid_points = 20000;
  std::size_t threads = 0;
};

/// Replicated sup-norm ratios for each config (one per r). Every config must
/// be inverted-V with the same pools, else CONFIG_ERROR. Replication i of a
/// config uses seed replication_stream(config.seed, i).key().
SSCTable ssc_convergence(const std::vector<core::SystemConfig>& configs, const SSCOptions& options);

struct Bin {
  double lo;
  double hi;
};

/// Ten equal-width bins over the support by default; atom-aligned bins
/// (split at midpoints between atoms) for discrete and point laws.
std::vector<Bin> default_bins(const core::RateDistribution& law, std::size_t count = 10);

/// Half-open [lo, hi) except the last bin, which also holds hi.
std::size_t bin_index(const std::vector<Bin>& bins, double rate);

/// Limiting idleness law of a bin: rate-biased for LISF and RANDOM, a point
/// mass at the slowest rate for FSF.
double eta_theory(core::Policy policy, const core::RateDistribution& law, const std::vector<Bin>& bins,
                  std::size_t b);

struct FairnessEstimate {
  std::vector<Bin> bins;
  std::vector<double> eta_hat;
  std::vector<double> eta_theory;
  /// max_b |eta_hat - eta_theory|
  double max_error = 0.0;
  /// sup over samples and bins of |idle in A_b - eta(A_b) * idle| / sqrt(N)
  double discrepancy = 0.0;
  /// Idle server-samples in the window.
  double idle_mass = 0.0;
};

/// Time-averaged share of idleness per bin over samples in
/// [warmup * T, T]. Needs per-server idle indicators (record_servers).
/// NO_IDLENESS if no server is idle at any window sample.
FairnessEstimate fairness_estimate(const sim::PathRecord& path, const core::RateDistribution& law,
                                   const std::vector<Bin>& bins, double warmup_fraction = 0.1);

/// Idle-mass weighted combination of estimates over the same bins, e.g. from
/// independent systems. Discrepancy is the largest of the inputs.
FairnessEstimate pool_fairness(const std::vector<FairnessEstimate>& estimates);

struct StaticPlan {
  double rho_star = 0.0;
  std::vector<double> x_star;
  bool heavy_traffic = false;
};

/// Single-class inverted-V plan: rho* = lambda / sum beta_i mu_i, every pool
/// utilized at rho*.
StaticPlan static_planning_inverted_v(const std::vector<double>& beta, const std::vector<double>& mu, double lambda);

/// Hydrodynamic windows m = 0, 1, ... while m < sqrt(|N|) T.
std::vector<HydroScaledPath> hydro_windows(const sim::PathRecord& path, double r, double T, double L);

/// Fraction of sample pairs (t1 < t2) in each window, over at most
/// `max_points` evenly spaced samples per window, with
/// max-component |X(t2) - X(t1)| > n_const |t2 - t1| + eps.
double almost_lipschitz_check(const std::vector<HydroScaledPath>& paths, double n_const, double eps,
                              std::size_t max_points = 64);

}  // namespace hetq::ssc
