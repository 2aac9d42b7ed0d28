#include "hetq/ssc/ssc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hetq/error.hpp"

namespace hetq::ssc {

SSCFunctionSpec SSCFunctionSpec::make(std::vector<double> beta, std::vector<double> mu) {
  require(!mu.empty() && beta.size() == mu.size(), ErrorCode::ConfigError,
          "pool fractions and rates must have the same nonzero length");
  double total = 0.0, first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    require(beta[i] > 0.0 && mu[i] > 0.0, ErrorCode::ConfigError, "pool fractions and rates must be positive");
    require(i == 0 || mu[i] > mu[i - 1], ErrorCode::ConfigError, "pool rates must be strictly increasing");
    total += beta[i];
    first += beta[i] * mu[i];
    second += beta[i] * mu[i] * mu[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorCode::ConfigError, "pool fractions must sum to 1");
  SSCFunctionSpec s;
  s.gamma_I = mu.size() == 1 ? mu[0] : second / first;
  s.beta = std::move(beta);
  s.mu = std::move(mu);
  return s;
}

SSCFunctionSpec SSCFunctionSpec::make(std::vector<double> beta, std::vector<double> mu, double gamma_I) {
  auto s = make(std::move(beta), std::move(mu));
  require(std::abs(gamma_I - s.gamma_I) <= 1e-12 * s.gamma_I, ErrorCode::ConfigError,
          "gamma_I does not match sum beta mu^2 / sum beta mu");
  return s;
}

SSCFunctionSpec SSCFunctionSpec::from(const core::SystemConfig& config) {
  require(config.inverted_v(), ErrorCode::ConfigError, "SSC diagnostics need an inverted-V config (key 'pools')");
  std::vector<double> beta, mu;
  for (const auto& p : config.pools) {
    beta.push_back(p.beta);
    mu.push_back(p.mu);
  }
  return make(std::move(beta), std::move(mu));
}

double ssc_g(const SSCFunctionSpec& spec, double /*q*/, const std::vector<double>& z) {
  require(z.size() == spec.pools(), ErrorCode::ConfigError, "z has the wrong number of pools");
  if (spec.pools() == 1) return 0.0;
  double g = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) g += z[i] * (spec.mu[i] - spec.gamma_I);
  return std::abs(g);
}

namespace {

// Index of the last sample at or before s.
std::size_t sample_at(const sim::PathRecord& path, double s) {
  const auto it = std::upper_bound(path.t.begin(), path.t.end(), s);
  return it == path.t.begin() ? 0 : static_cast<std::size_t>(it - path.t.begin()) - 1;
}

double path_end(const sim::PathRecord& path) {
  return path.t.empty() ? 0.0 : std::min(path.t.back(), path.end_time);
}

}  // namespace

HydroScaledPath hydro_scale(const sim::PathRecord& path, double r, std::size_t m, double L) {
  require(!path.t.empty(), ErrorCode::WindowError, "path has no samples");
  require(L > 0.0, ErrorCode::ConfigError, "key 'hydro_L': window length must be positive");
  const double n = static_cast<double>(path.n);
  HydroScaledPath h;
  h.r = r;
  h.m = m;
  h.start = static_cast<double>(m) / std::sqrt(n);
  require(h.start <= path_end(path), ErrorCode::WindowError, "path ends before the window starts");

  const std::size_t j0 = sample_at(path, h.start);
  double dev = 0.0;
  for (std::size_t i = 0; i < path.pool_count(); ++i) {
    const double d = static_cast<double>(path.Z[i][j0]) - static_cast<double>(path.pool_sizes[i]);
    dev += d * d;
  }
  h.x_rm = std::max(dev, n);
  h.stretch = std::sqrt(h.x_rm) / n;
  const double end = h.start + h.stretch * L;
  require(end <= path_end(path) * (1.0 + 1e-12), ErrorCode::WindowError,
          "path ends at " + std::to_string(path_end(path)) + " before the window end " + std::to_string(end));

  const double root = std::sqrt(h.x_rm);
  h.Z.assign(path.pool_count(), {});
  auto push = [&](double s, std::size_t j) {
    h.t.push_back((s - h.start) / h.stretch);
    h.Q.push_back(static_cast<double>(path.Q[j]) / root);
    for (std::size_t i = 0; i < path.pool_count(); ++i)
      h.Z[i].push_back((static_cast<double>(path.Z[i][j]) - static_cast<double>(path.pool_sizes[i])) / root);
  };
  push(h.start, j0);
  for (std::size_t j = j0 + 1; j < path.samples() && path.t[j] <= end; ++j) push(path.t[j], j);
  return h;
}

std::vector<HydroScaledPath> hydro_windows(const sim::PathRecord& path, double r, double T, double L) {
  std::vector<HydroScaledPath> out;
  const double limit = std::sqrt(static_cast<double>(path.n)) * T;
  for (std::size_t m = 0; static_cast<double>(m) < limit; ++m) out.push_back(hydro_scale(path, r, m, L));
  return out;
}

double almost_lipschitz_check(const std::vector<HydroScaledPath>& paths, double n_const, double eps,
                              std::size_t max_points) {
  require(max_points >= 2, ErrorCode::ConfigError, "need at least two points per window");
  std::size_t pairs = 0, exceed = 0;
  for (const auto& h : paths) {
    const std::size_t count = h.t.size();
    if (count < 2) continue;
    std::vector<std::size_t> idx;
    const std::size_t k = std::min(count, max_points);
    for (std::size_t a = 0; a < k; ++a) idx.push_back(a * (count - 1) / (k - 1));
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        const std::size_t i = idx[a], j = idx[b];
        double jump = std::abs(h.Q[j] - h.Q[i]);
        for (const auto& z : h.Z) jump = std::max(jump, std::abs(z[j] - z[i]));
        ++pairs;
        if (jump > n_const * std::abs(h.t[j] - h.t[i]) + eps) ++exceed;
      }
    }
  }
  return pairs == 0 ? 0.0 : static_cast<double>(exceed) / static_cast<double>(pairs);
}

SupNorms ssc_sup_norms(const SSCFunctionSpec& spec, const sim::PathRecord& path, double T) {
  require(path.pool_count() == spec.pools(), ErrorCode::ConfigError, "path pools do not match the SSC spec");
  const double root = std::sqrt(static_cast<double>(path.n));
  SupNorms s;
  std::vector<double> z(spec.pools());
  for (std::size_t j = 0; j < path.samples() && path.t[j] <= T; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = (static_cast<double>(path.Z[i][j]) - static_cast<double>(path.pool_sizes[i])) / root;
      norm += z[i] * z[i];
    }
    s.g = std::max(s.g, ssc_g(spec, static_cast<double>(path.Q[j]) / root, z));
    s.z = std::max(s.z, std::sqrt(norm));
  }
  s.ratio = s.g / std::max(s.z, 1.0);
  return s;
}

namespace {

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

SSCTable ssc_convergence(const std::vector<core::SystemConfig>& configs, const SSCOptions& options) {
  require(!configs.empty(), ErrorCode::ConfigError, "key 'r_list': need at least one scale");
  require(options.reps >= 1, ErrorCode::ConfigError, "key 'reps': need at least one replication");
  require(options.T > 0.0, ErrorCode::ConfigError, "key 'ssc_T': horizon must be positive");
  const auto spec = SSCFunctionSpec::from(configs.front());
  for (const auto& c : configs) {
    const auto other = SSCFunctionSpec::from(c);
    require(other.beta == spec.beta && other.mu == spec.mu, ErrorCode::ConfigError,
            "pool structures differ across the r sequence");
  }

  sim::RunOptions run_options;
  run_options.horizon = options.T;
  run_options.grid_points = options.grid_points;
  run_options.record_waits = false;

  const std::size_t reps = options.reps;
  SSCTable table;
  table.rows.resize(configs.size() * reps);
  sim::parallel_for(table.rows.size(), options.threads, [&](std::size_t task) {
    const std::size_t c = task / reps, rep = task % reps;
    core::SystemConfig cfg = configs[c];
    cfg.seed = sim::replication_stream(configs[c].seed, rep).key();
    core::RngStream root(cfg.seed);
    const auto system = core::realize(cfg, root);
    const auto path = sim::run(cfg, system, run_options);
    const auto s = ssc_sup_norms(spec, path, options.T);
    table.rows[task] = {cfg.r, rep, s.g, s.z, s.ratio};
  });

  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<double> ratio, g, z;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const auto& row = table.rows[c * reps + rep];
      ratio.push_back(row.ratio);
      g.push_back(row.g_supnorm);
      z.push_back(row.z_supnorm);
    }
    table.summary.push_back(
        {configs[c].r, quantile(ratio, 0.5), quantile(ratio, 0.25), quantile(ratio, 0.75), quantile(g, 0.5),
         quantile(z, 0.5)});
  }
  return table;
}

std::vector<Bin> default_bins(const core::RateDistribution& law, std::size_t count) {
  require(count >= 1, ErrorCode::ConfigError, "key 'fairness_bins': need at least one bin");
  std::vector<Bin> bins;
  if (law.kind() == core::RateDistribution::Kind::Uniform) {
    const double width = (law.upper() - law.lower()) / static_cast<double>(count);
    for (std::size_t b = 0; b < count; ++b)
      bins.push_back({law.lower() + width * static_cast<double>(b),
                      b + 1 == count ? law.upper() : law.lower() + width * static_cast<double>(b + 1)});
    return bins;
  }
  const auto& atoms = law.atoms();
  double lo = law.lower();
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const double hi = a + 1 == atoms.size() ? law.upper() : 0.5 * (atoms[a].rate + atoms[a + 1].rate);
    bins.push_back({lo, hi});
    lo = hi;
  }
  return bins;
}

std::size_t bin_index(const std::vector<Bin>& bins, double rate) {
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const bool last = b + 1 == bins.size();
    if (rate >= bins[b].lo && (rate < bins[b].hi || (last && rate <= bins[b].hi))) return b;
  }
  return bins.size();
}

double eta_theory(core::Policy policy, const core::RateDistribution& law, const std::vector<Bin>& bins,
                  std::size_t b) {
  if (policy == core::Policy::FSF) return bin_index(bins, law.lower()) == b ? 1.0 : 0.0;
  if (law.kind() == core::RateDistribution::Kind::Uniform)
    return law.first_moment(bins[b].lo, bins[b].hi) / law.mean();
  double mass = 0.0;
  for (const auto& a : law.atoms())
    if (bin_index(bins, a.rate) == b) mass += a.probability * a.rate;
  return mass / law.mean();
}

FairnessEstimate fairness_estimate(const sim::PathRecord& path, const core::RateDistribution& law,
                                   const std::vector<Bin>& bins, double warmup_fraction) {
  require(!bins.empty(), ErrorCode::ConfigError, "need at least one bin");
  require(warmup_fraction >= 0.0 && warmup_fraction < 1.0, ErrorCode::ConfigError,
          "key 'warmup': fraction must lie in [0, 1)");
  require(path.idle.size() == path.samples() * path.n, ErrorCode::ConfigError,
          "fairness needs per-server idle indicators (record_servers = true)");

  std::vector<std::size_t> bin_of(path.n);
  for (std::size_t k = 0; k < path.n; ++k) {
    bin_of[k] = bin_index(bins, path.rates[k]);
    require(bin_of[k] < bins.size(), ErrorCode::ConfigError,
            "server rate " + std::to_string(path.rates[k]) + " lies outside every bin");
  }

  FairnessEstimate f;
  f.bins = bins;
  for (std::size_t b = 0; b < bins.size(); ++b) f.eta_theory.push_back(eta_theory(path.policy, law, bins, b));

  const double start = warmup_fraction * path_end(path);
  const double root = std::sqrt(static_cast<double>(path.n));
  std::vector<double> total(bins.size(), 0.0);
  std::vector<double> now(bins.size());
  for (std::size_t j = 0; j < path.samples(); ++j) {
    if (path.t[j] < start || path.t[j] > path_end(path)) continue;
    std::fill(now.begin(), now.end(), 0.0);
    double idle = 0.0;
    for (std::size_t k = 0; k < path.n; ++k) {
      if (path.idle[j * path.n + k] == 0) continue;
      now[bin_of[k]] += 1.0;
      idle += 1.0;
    }
    for (std::size_t b = 0; b < bins.size(); ++b) {
      total[b] += now[b];
      f.discrepancy = std::max(f.discrepancy, std::abs(now[b] - f.eta_theory[b] * idle) / root);
    }
    f.idle_mass += idle;
  }
  require(f.idle_mass > 0.0, ErrorCode::NoIdleness, "no idle server at any sample of the window");
  for (std::size_t b = 0; b < bins.size(); ++b) {
    f.eta_hat.push_back(total[b] / f.idle_mass);
    f.max_error = std::max(f.max_error, std::abs(f.eta_hat[b] - f.eta_theory[b]));
  }
  return f;
}

FairnessEstimate pool_fairness(const std::vector<FairnessEstimate>& estimates) {
  require(!estimates.empty(), ErrorCode::ConfigError, "nothing to pool");
  FairnessEstimate out;
  out.bins = estimates.front().bins;
  out.eta_theory = estimates.front().eta_theory;
  out.eta_hat.assign(out.bins.size(), 0.0);
  for (const auto& e : estimates) {
    require(e.eta_hat.size() == out.bins.size(), ErrorCode::ConfigError, "estimates use different bins");
    for (std::size_t b = 0; b < out.bins.size(); ++b) out.eta_hat[b] += e.eta_hat[b] * e.idle_mass;
    out.idle_mass += e.idle_mass;
    out.discrepancy = std::max(out.discrepancy, e.discrepancy);
  }
  for (std::size_t b = 0; b < out.bins.size(); ++b) {
    out.eta_hat[b] /= out.idle_mass;
    out.max_error = std::max(out.max_error, std::abs(out.eta_hat[b] - out.eta_theory[b]));
  }
  return out;
}

StaticPlan static_planning_inverted_v(const std::vector<double>& beta, const std::vector<double>& mu, double lambda) {
  require(beta.size() == mu.size() && !mu.empty(), ErrorCode::ConfigError,
          "pool fractions and rates must have the same nonzero length");
  double capacity = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) capacity += beta[i] * mu[i];
  require(capacity > 0.0, ErrorCode::Domain, "total pool capacity must be positive");
  StaticPlan plan;
  plan.rho_star = lambda / capacity;
  plan.x_star.assign(mu.size(), plan.rho_star);
  plan.heavy_traffic = std::abs(plan.rho_star - 1.0) <= 1e-9;
  return plan;
}

}  // namespace hetq::ssc
