#include "hetq/core/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hetq/core/text.hpp"
#include "hetq/error.hpp"

namespace hetq::core {

std::string to_string(Policy p) {
  switch (p) {
    case Policy::LISF: return "LISF";
    case Policy::FSF: return "FSF";
    case Policy::Random: return "RANDOM";
  }
  return "?";
}

std::string to_string(AbandonMode m) {
  switch (m) {
    case AbandonMode::None: return "none";
    case AbandonMode::PerCustomer: return "per_customer";
    case AbandonMode::Perturbed: return "perturbed";
  }
  return "?";
}

Policy parse_policy(const std::string& text) {
  std::string s = strip(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "LISF") return Policy::LISF;
  if (s == "FSF") return Policy::FSF;
  if (s == "RANDOM") return Policy::Random;
  fail(ErrorCode::ConfigError, "key 'policy': expected LISF, FSF or RANDOM, got '" + text + "'");
}

AbandonMode parse_abandon_mode(const std::string& text) {
  const std::string s = strip(text);
  if (s == "none") return AbandonMode::None;
  if (s == "per_customer") return AbandonMode::PerCustomer;
  if (s == "perturbed") return AbandonMode::Perturbed;
  fail(ErrorCode::ConfigError, "key 'abandon_mode': expected none, per_customer or perturbed, got '" + text + "'");
}

const std::vector<std::string>& KeyValues::known_keys() {
  static const std::vector<std::string> keys = {
      // system
      "r", "lambda", "arrival_scv", "N", "theta", "nu", "policy", "seed", "pools", "rates", "reps",
      // simulation
      "horizon", "warmup", "grid_points", "abandon_mode", "initial_X", "queue_cap", "record_servers",
      // diffusion analytics
      "beta", "sigma", "gamma", "mu_bar", "density_lo", "density_hi", "density_points",
      "eps_lo", "eps_hi", "eps_step",
      // staffing
      "c_s", "c_w", "d", "C_un", "x_lo", "x_hi", "tol", "cost_model", "stable_margin",
      // ssc and fairness
      "r_list", "ssc_T", "hydro_L", "lip_const", "lip_eps", "fairness_bins",
      // coupling
      "p_rate", "skeleton_events"};
  return keys;
}

void KeyValues::set(const std::string& key, const std::string& value) {
  const auto& known = known_keys();
  require(std::find(known.begin(), known.end(), key) != known.end(), ErrorCode::ConfigError,
          "unknown config key '" + key + "'");
  values_[key] = strip(value);
}

const std::string& KeyValues::get(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::ConfigError, "missing config key '" + key + "'");
  return it->second;
}

std::string KeyValues::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValues::number_or(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(it->second, key);
}

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError,
            "line " + std::to_string(lineno) + ": expected 'key = value'");
    kv.set(strip(line.substr(0, eq)), line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

std::vector<Pool> parse_pools(const std::string& text) {
  std::vector<Pool> pools;
  for (const auto& item : split(text, ',')) {
    const auto parts = split(item, ':');
    require(parts.size() == 2, ErrorCode::ConfigError, "key 'pools': expected beta:mu entries");
    pools.push_back({parse_double(parts[0], "pools"), parse_double(parts[1], "pools")});
  }
  return pools;
}

}  // namespace

SystemConfig SystemConfig::from_keys(const KeyValues& kv) {
  SystemConfig c;
  c.r = kv.number_or("r", c.r);
  c.arrival_scv = kv.number_or("arrival_scv", c.arrival_scv);
  c.abandon_rate = kv.number_or("nu", c.abandon_rate);
  if (kv.has("policy")) c.policy = parse_policy(kv.get("policy"));
  if (kv.has("seed")) c.seed = parse_u64(kv.get("seed"), "seed");
  if (kv.has("pools")) c.pools = parse_pools(kv.get("pools"));
  if (kv.has("rates")) c.rates = RateDistribution::parse(kv.get("rates"));
  require(!(kv.has("N") && kv.has("theta")), ErrorCode::ConfigError,
          "keys 'N' and 'theta' are mutually exclusive staffing rules");
  if (kv.has("N")) {
    const auto n = parse_int(kv.get("N"), "N");
    require(n >= 1, ErrorCode::ConfigError, "key 'N': need at least one server");
    c.staffing = Staffing::explicit_servers(static_cast<std::size_t>(n));
  } else {
    c.staffing = Staffing::halfin_whitt(kv.number_or("theta", 1.0));
  }
  c.lambda_r = kv.has("lambda") ? parse_double(kv.get("lambda"), "lambda") : c.r * c.mu_bar();
  c.validate();
  return c;
}

void SystemConfig::validate() const {
  require(std::isfinite(r) && r > 0.0, ErrorCode::ConfigError, "key 'r': scale index must be positive");
  // lambda = 0 is accepted as the degenerate no-arrival system.
  require(std::isfinite(lambda_r) && lambda_r >= 0.0, ErrorCode::ConfigError,
          "key 'lambda': arrival rate must be nonnegative");
  require(std::isfinite(arrival_scv) && arrival_scv >= 0.0, ErrorCode::ConfigError,
          "key 'arrival_scv': must be >= 0");
  require(std::isfinite(abandon_rate) && abandon_rate >= 0.0, ErrorCode::ConfigError, "key 'nu': must be >= 0");
  if (staffing.kind == Staffing::Kind::HalfinWhitt)
    require(std::isfinite(staffing.theta) && staffing.theta >= 0.0, ErrorCode::ConfigError,
            "key 'theta': safety coefficient must be >= 0");
  if (!pools.empty()) {
    double total = 0.0;
    for (std::size_t i = 0; i < pools.size(); ++i) {
      require(pools[i].beta > 0.0 && pools[i].mu > 0.0, ErrorCode::ConfigError,
              "key 'pools': fractions and rates must be positive");
      require(i == 0 || pools[i].mu > pools[i - 1].mu, ErrorCode::ConfigError,
              "key 'pools': pool rates must be strictly increasing");
      total += pools[i].beta;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::ConfigError, "key 'pools': fractions must sum to 1");
  }
}

RateDistribution SystemConfig::rate_law() const {
  if (pools.empty()) return rates;
  std::vector<Atom> atoms;
  for (const auto& p : pools) atoms.push_back({p.mu, p.beta});
  return RateDistribution::discrete(std::move(atoms));
}

std::size_t SystemConfig::servers() const { return staffing_level(lambda_r, mu_bar(), staffing); }

std::size_t staffing_level(double lambda, double mu_bar, const Staffing& staffing) {
  if (staffing.kind == Staffing::Kind::Explicit) {
    require(staffing.servers >= 1, ErrorCode::ConfigError, "key 'N': need at least one server");
    return staffing.servers;
  }
  require(mu_bar > 0.0, ErrorCode::ConfigError, "mean service rate must be positive");
  const double load = lambda / mu_bar;
  const double target = load + staffing.theta * std::sqrt(load);
  // Absorb representation error so that e.g. 100 + 1 * 10 staffs exactly 110.
  const double nearest = std::round(target);
  const double n = std::abs(target - nearest) <= 1e-9 * std::max(1.0, target) ? nearest : std::ceil(target);
  return static_cast<std::size_t>(std::max(1.0, n));
}

double RealizedSystem::min_rate() const { return *std::min_element(mu.begin(), mu.end()); }
double RealizedSystem::max_rate() const { return *std::max_element(mu.begin(), mu.end()); }

RealizedSystem RealizedSystem::from_rates(std::vector<double> rates, double mu_bar, double r) {
  RealizedSystem s;
  s.n = rates.size();
  s.mu = std::move(rates);
  s.mu_bar = mu_bar;
  s.sum_mu = std::accumulate(s.mu.begin(), s.mu.end(), 0.0);
  s.zeta_hat = (s.sum_mu - static_cast<double>(s.n) * mu_bar) / std::sqrt(r);
  s.pool_of.assign(s.n, 0);
  s.pool_sizes = {s.n};
  s.pool_rates = {mu_bar};
  return s;
}

RealizedSystem realize(const SystemConfig& config, RngStream& stream) {
  config.validate();
  const std::size_t n = config.servers();
  if (!config.inverted_v()) {
    RngStream rates_stream = stream.split(Stream::Rates);
    return RealizedSystem::from_rates(sample_rates(config.rates, n, rates_stream), config.mu_bar(), config.r);
  }
  // Largest-remainder apportionment of N across pools.
  const auto& pools = config.pools;
  std::vector<std::size_t> sizes(pools.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const double exact = pools[i].beta * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    assigned += sizes[i];
    remainders.push_back({exact - static_cast<double>(sizes[i]), i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[remainders[k % remainders.size()].second];

  std::vector<double> rates;
  std::vector<std::size_t> pool_of;
  std::vector<double> pool_rates;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    rates.insert(rates.end(), sizes[i], pools[i].mu);
    pool_of.insert(pool_of.end(), sizes[i], i);
    pool_rates.push_back(pools[i].mu);
  }
  RealizedSystem s = RealizedSystem::from_rates(std::move(rates), config.mu_bar(), config.r);
  s.pool_of = std::move(pool_of);
  s.pool_sizes = std::move(sizes);
  s.pool_rates = std::move(pool_rates);
  return s;
}

double drift_beta(double theta, double zeta, double mu_bar) { return -zeta - theta * mu_bar; }

double finite_drift(const RealizedSystem& system, double x) { return -system.zeta_hat - x * system.mu_bar; }

}  // namespace hetq::core
