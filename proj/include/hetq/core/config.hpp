#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hetq/core/random.hpp"
#include "hetq/core/rate_distribution.hpp"

namespace hetq::core {

enum class Policy { LISF, FSF, Random };

enum class AbandonMode { None, PerCustomer, Perturbed };

std::string to_string(Policy p);
std::string to_string(AbandonMode m);
Policy parse_policy(const std::string& text);
AbandonMode parse_abandon_mode(const std::string& text);

struct Staffing {
  enum class Kind { Explicit, HalfinWhitt };
  Kind kind = Kind::HalfinWhitt;
  std::size_t servers = 0;  // Explicit
  double theta = 1.0;       // HalfinWhitt safety coefficient

  static Staffing explicit_servers(std::size_t n) { return {Kind::Explicit, n, 0.0}; }
  static Staffing halfin_whitt(double theta) { return {Kind::HalfinWhitt, 0, theta}; }
};

/// One homogeneous pool of an inverted-V system.
struct Pool {
  double beta;  // fraction of servers
  double mu;    // service rate
};

/// Ordered `key = value` pairs as read from a config file or `--set` overrides.
class KeyValues {
 public:
  /// Parses `key = value` lines; `#` starts a comment. Unknown keys fail with
  /// CONFIG_ERROR naming the key.
  static KeyValues parse(const std::string& text);
  static KeyValues load(const std::string& path);

  /// Every key accepted by any hetq command.
  static const std::vector<std::string>& known_keys();

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double number_or(const std::string& key, double fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Parameters of one system in a heavy-traffic sequence.
struct SystemConfig {
  double r = 100.0;
  double lambda_r = 100.0;
  double arrival_scv = 1.0;
  Staffing staffing = Staffing::halfin_whitt(1.0);
  double abandon_rate = 0.0;
  Policy policy = Policy::LISF;
  std::uint64_t seed = 1;
  std::vector<Pool> pools;  // non-empty selects inverted-V mode
  RateDistribution rates = RateDistribution::point(1.0);

  /// Builds and validates from key-values. `lambda` defaults to r * mean rate.
  static SystemConfig from_keys(const KeyValues& kv);

  void validate() const;
  bool inverted_v() const { return !pools.empty(); }
  /// Rate law of a single server (the pool mixture in inverted-V mode).
  RateDistribution rate_law() const;
  double mu_bar() const { return rate_law().mean(); }
  std::size_t servers() const;
};

/// N = ceil(lambda/mu_bar + theta * sqrt(lambda/mu_bar)), at least 1.
std::size_t staffing_level(double lambda, double mu_bar, const Staffing& staffing);

/// A drawn system: N servers with their rates.
struct RealizedSystem {
  std::size_t n = 0;
  std::vector<double> mu;
  double sum_mu = 0.0;
  double mu_bar = 0.0;
  /// (sum_mu - N mu_bar) / sqrt(r)
  double zeta_hat = 0.0;
  /// Pool index per server (all zero outside inverted-V mode).
  std::vector<std::size_t> pool_of;
  std::vector<std::size_t> pool_sizes;
  std::vector<double> pool_rates;

  std::size_t pool_count() const { return pool_sizes.size(); }
  bool stable(double lambda) const { return sum_mu > lambda; }
  double min_rate() const;
  double max_rate() const;

  static RealizedSystem from_rates(std::vector<double> rates, double mu_bar, double r);
};

/// Draws the server rates for `config` from `stream`. Inverted-V pools are
/// sized deterministically by largest remainder of beta_i * N.
RealizedSystem realize(const SystemConfig& config, RngStream& stream);

/// Limiting drift -zeta - theta * mu_bar.
double drift_beta(double theta, double zeta, double mu_bar);

/// Finite-r drift of a realized system at safety coefficient x.
double finite_drift(const RealizedSystem& system, double x);

}  // namespace hetq::core
