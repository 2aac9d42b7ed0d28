#include "hetq/cli/app.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hetq/core/config.hpp"
#include "hetq/core/text.hpp"
#include "hetq/diffusion/diffusion.hpp"
#include "hetq/sim/sim.hpp"
#include "hetq/ssc/ssc.hpp"
#include "hetq/staffing/staffing.hpp"
#include "json.hpp"

namespace hetq::cli {

namespace fs = std::filesystem;
using core::format_double;
using json = nlohmann::ordered_json;

namespace {

/// Config lookups that remember every default they hand out.
class Settings {
 public:
  explicit Settings(core::KeyValues kv) : kv_(std::move(kv)) {}

  const core::KeyValues& keys() const { return kv_; }
  bool has(const std::string& key) const { return kv_.has(key); }

  double number(const std::string& key, double fallback) {
    if (kv_.has(key)) return core::parse_double(kv_.get(key), key);
    defaults_[key] = format_double(fallback);
    return fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!kv_.has(key)) {
      defaults_[key] = std::to_string(fallback);
      return fallback;
    }
    const auto v = core::parse_int(kv_.get(key), key);
    require(v >= 0, ErrorCode::ConfigError, "key '" + key + "': must be >= 0");
    return static_cast<std::size_t>(v);
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (kv_.has(key)) return kv_.get(key);
    defaults_[key] = fallback;
    return fallback;
  }
  bool flag(const std::string& key, bool fallback) {
    if (kv_.has(key)) return core::parse_bool(kv_.get(key), key);
    defaults_[key] = fallback ? "true" : "false";
    return fallback;
  }

  /// Given keys plus the defaults that were used.
  std::map<std::string, std::string> resolved() const {
    std::map<std::string, std::string> all = defaults_;
    for (const auto& [k, v] : kv_.entries()) all[k] = v;
    return all;
  }

 private:
  core::KeyValues kv_;
  std::map<std::string, std::string> defaults_;
};

/// Rows of preformatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string num(double x) { return format_double(x); }
std::string num(std::int64_t x) { return std::to_string(x); }
std::string num(std::size_t x) { return std::to_string(x); }

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

json cell_json(const std::string& cell) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec == std::errc() && ptr == cell.data() + cell.size() && !cell.empty()) {
    if (cell.find_first_of(".eE") == std::string::npos) return json(std::stoll(cell));
    return json(value);
  }
  return json(cell);
}

std::string to_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.header[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  return rows.dump(2) + "\n";
}

Table table_from_csv(const std::string& csv) {
  Table t;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  t.header = core::split(line, ',');
  while (std::getline(in, line))
    if (!line.empty()) t.add(core::split(line, ','));
  return t;
}

/// Artifact writer for one command run.
class Outputs {
 public:
  Outputs(fs::path dir, std::string format) : dir_(std::move(dir)), format_(std::move(format)) {}

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    f << content;
    require(static_cast<bool>(f), ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    files_.push_back({name, sha256_hex(content), content.size()});
  }

  /// Writes `stem.csv` or `stem.json` according to the format.
  void table(const std::string& stem, const Table& t) {
    if (format_ == "json") write(stem + ".json", to_json(t));
    else write(stem + ".csv", to_csv(t));
  }

  void document(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  struct File {
    std::string name;
    std::string sha256;
    std::size_t bytes;
  };
  const std::vector<File>& files() const { return files_; }

 private:
  fs::path dir_;
  std::string format_;
  std::vector<File> files_;
};

json system_json(const core::SystemConfig& c) {
  json j;
  j["r"] = c.r;
  j["lambda"] = c.lambda_r;
  j["N"] = c.servers();
  j["mu_bar"] = c.mu_bar();
  j["policy"] = core::to_string(c.policy);
  j["nu"] = c.abandon_rate;
  j["arrival_scv"] = c.arrival_scv;
  j["seed"] = c.seed;
  j["rates"] = c.rate_law().to_string();
  return j;
}

json estimates_json(const sim::SteadyEstimates& e) {
  return {{"window_start", e.window_start}, {"window_end", e.window_end}, {"p_wait", e.p_wait},
          {"p_wait_se", e.p_wait_se},       {"mean_Q", e.mean_Q},         {"mean_Q_se", e.mean_Q_se},
          {"p_full", e.p_full},             {"abandon_rate", e.abandon_rate}};
}

sim::RunOptions run_options(Settings& s, const core::SystemConfig& c) {
  sim::RunOptions o;
  o.horizon = s.number("horizon", 1000.0);
  o.grid_points = s.count("grid_points", 10000);
  const std::string mode = s.text("abandon_mode", c.abandon_rate > 0.0 ? "per_customer" : "none");
  o.mode = core::parse_abandon_mode(mode);
  if (s.has("initial_X")) o.initial_X = s.count("initial_X", c.servers());
  o.queue_cap = s.count("queue_cap", 1000000);
  o.record_servers = s.flag("record_servers", false);
  o.record_waits = false;
  require(o.horizon > 0.0, ErrorCode::ConfigError, "key 'horizon': must be positive");
  require(o.grid_points >= 2, ErrorCode::ConfigError, "key 'grid_points': need at least 2");
  return o;
}

double warmup(Settings& s) {
  const double w = s.number("warmup", 0.2);
  require(w >= 0.0 && w < 1.0, ErrorCode::ConfigError, "key 'warmup': fraction must lie in [0, 1)");
  return w;
}

int cmd_simulate(Settings& s, Outputs& out, json& report) {
  const auto c = core::SystemConfig::from_keys(s.keys());
  const auto options = run_options(s, c);
  const double w = warmup(s);
  const std::size_t reps = s.count("reps", 1);
  require(reps >= 1, ErrorCode::ConfigError, "key 'reps': need at least one replication");
  report["system"] = system_json(c);

  if (reps == 1) {
    core::RngStream root(c.seed);
    const auto system = core::realize(c, root);
    const auto path = sim::run(c, system, options);
    out.table("path", table_from_csv(sim::path_csv(path)));
    if (path.status != sim::RunStatus::Ok) {
      json summary = system_json(c);
      summary["status"] = "OVERFLOW_GUARD";
      summary["end_time"] = path.end_time;
      out.document("summary.json", summary);
      report["status"] = "OVERFLOW_GUARD";
      return 3;
    }
    try {
      const auto e = sim::steady_estimates(path, w);
      out.write("summary.json", sim::path_summary_json(path, e));
      report["estimates"] = estimates_json(e);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyWindow) throw;
      // A drained system still has a valid path; only the window estimates are undefined.
      json summary = system_json(c);
      summary["status"] = "ok";
      summary["end_time"] = path.end_time;
      summary["estimates"] = nullptr;
      summary["note"] = e.what();
      out.document("summary.json", summary);
      report["estimates"] = nullptr;
    }
    return 0;
  }

  const auto results = sim::replicate(c, options, reps, w);
  Table t{{"rep", "zeta_hat", "sum_mu", "N", "status", "p_wait", "p_wait_se", "mean_Q", "mean_Q_se", "abandon_rate"},
          {}};
  double p = 0.0, q = 0.0;
  bool overflow = false;
  for (const auto& r : results) {
    const bool ok = r.status == sim::RunStatus::Ok;
    overflow = overflow || !ok;
    const auto& e = r.estimates;
    t.add({num(r.index), num(r.zeta_hat), num(r.sum_mu), num(r.n), ok ? "ok" : "OVERFLOW_GUARD", num(e.p_wait),
           num(e.p_wait_se), num(e.mean_Q), num(e.mean_Q_se), num(e.abandon_rate)});
    p += e.p_wait;
    q += e.mean_Q;
  }
  out.table("replications", t);
  json summary = system_json(c);
  summary["reps"] = reps;
  summary["mean_p_wait"] = p / static_cast<double>(reps);
  summary["mean_Q"] = q / static_cast<double>(reps);
  summary["status"] = overflow ? "OVERFLOW_GUARD" : "ok";
  out.document("summary.json", summary);
  report["summary"] = summary;
  return overflow ? 3 : 0;
}

int cmd_analyze(Settings& s, Outputs& out, json& report) {
  const auto c = core::SystemConfig::from_keys(s.keys());
  const auto law = c.rate_law();
  const double mu_bar = s.has("mu_bar") ? s.number("mu_bar", law.mean()) : law.mean();
  const double theta = c.staffing.kind == core::Staffing::Kind::HalfinWhitt ? c.staffing.theta : 1.0;
  diffusion::DiffusionParams p;
  p.sigma = s.has("sigma") ? s.number("sigma", 0.0) : diffusion::diffusion_sigma(mu_bar, c.arrival_scv);
  p.gamma = s.has("gamma") ? s.number("gamma", 0.0)
                           : diffusion::idleness_gamma(core::rate_moments(law), c.policy);
  p.beta = s.has("beta") ? s.number("beta", 0.0) : core::drift_beta(theta, 0.0, mu_bar);
  p.nu = c.abandon_rate;
  p.validate();

  const auto density = diffusion::stationary(p);
  const double lo = s.number("density_lo", -5.0);
  const double hi = s.number("density_hi", 5.0);
  const std::size_t points = s.count("density_points", 201);
  require(hi > lo && points >= 2, ErrorCode::ConfigError, "density grid needs density_hi > density_lo and 2+ points");

  Table t{{"x", "pdf", "cdf"}, {}};
  json grid = json::array();
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    t.add({num(x), num(density.pdf(x)), num(density.cdf(x))});
    grid.push_back({{"x", x}, {"pdf", density.pdf(x)}});
  }
  json a;
  a["params"] = {{"beta", p.beta}, {"sigma", p.sigma}, {"gamma", p.gamma}, {"nu", p.nu}};
  a["varrho"] = density.varrho;
  a["mean_positive_part"] = density.mean_positive_part();
  a["density"] = grid;
  out.document("analysis.json", a);
  out.table("density", t);
  report["varrho"] = density.varrho;
  report["mean_positive_part"] = a["mean_positive_part"];
  return 0;
}

int cmd_staff(Settings& s, Outputs& out, json& report) {
  const auto c = core::SystemConfig::from_keys(s.keys());
  const auto law = c.rate_law();
  staffing::CostSpec spec;
  spec.c_s = s.number("c_s", 1.0);
  spec.waiting = staffing::DelayCost::linear(s.number("c_w", 1.0));
  spec.d = s.number("d", 1.0);
  spec.C_un = s.number("C_un", 0.0);
  spec.nu = c.abandon_rate;
  spec.stable_margin = s.number("stable_margin", -1.0);
  const std::string model = s.text("cost_model", c.abandon_rate > 0.0 ? "aband" : "no_aband");
  require(model == "aband" || model == "no_aband", ErrorCode::ConfigError,
          "key 'cost_model': expected aband or no_aband, got '" + model + "'");
  const double x_lo = s.number("x_lo", 0.05);
  const double x_hi = s.number("x_hi", 4.0);
  const double tol = s.number("tol", 1e-4);

  auto breakdown = [&](double x) {
    return model == "aband" ? staffing::cost_aband(x, c, law, spec) : staffing::cost_no_aband(x, c, law, spec);
  };
  const auto result = staffing::optimize_staffing([&](double x) { return breakdown(x).total; }, x_lo, x_hi, tol);

  Table t{{"x", "cost"}, {}};
  for (const auto& [x, cost] : result.cost_curve) t.add({num(x), num(cost)});
  out.table("cost_curve", t);

  const auto best = breakdown(result.x_star);
  json j;
  j["cost_model"] = model;
  j["x_star"] = result.x_star;
  j["N_star"] = core::staffing_level(c.lambda_r, law.mean(), core::Staffing::halfin_whitt(result.x_star));
  j["cost_at_optimum"] = result.cost_at_optimum;
  j["breakdown"] = {{"staffing", best.staffing},
                    {"variable", best.variable},
                    {"p_stable", best.p_stable},
                    {"unstable_penalty", best.unstable_penalty}};
  j["unimodal"] = result.unimodal;
  j["bracket"] = {result.x_lo, result.x_hi};
  j["tol"] = result.tol;
  j["evaluations"] = result.evaluations;
  j["C_un"] = spec.C_un;
  out.document("staff.json", j);
  report["x_star"] = result.x_star;
  report["cost_at_optimum"] = result.cost_at_optimum;
  return 0;
}

int cmd_ql_sweep(Settings& s, Outputs& out, json& report) {
  const double lo = s.number("eps_lo", 0.05);
  const double hi = s.number("eps_hi", 0.5);
  const double step = s.number("eps_step", 0.05);
  const double mu_bar = s.number("mu_bar", 1.0);
  const double sigma = s.number("sigma", 4.0);
  const double theta = s.number("theta", 2.0);
  const double nu = s.number("nu", 2.0);
  require(step > 0.0 && hi >= lo, ErrorCode::ConfigError, "eps grid needs eps_step > 0 and eps_hi >= eps_lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  Table t{{"eps", "QL_lisf", "QL_fsf"}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
    t.add({num(eps), num(diffusion::ql_eps(eps, mu_bar, sigma, theta, nu, core::Policy::LISF)),
           num(diffusion::ql_eps(eps, mu_bar, sigma, theta, nu, core::Policy::FSF))});
  }
  out.table("ql_sweep", t);
  report["points"] = n;
  return 0;
}

int cmd_ssc(Settings& s, Outputs& out, json& report) {
  require(!s.has("lambda") && !s.has("N"), ErrorCode::ConfigError,
          "keys 'lambda' and 'N' conflict with r_list; staffing follows theta");
  const auto r_list = core::parse_double_list(s.text("r_list", "25,100,400"), "r_list");
  std::vector<core::SystemConfig> configs;
  for (double r : r_list) {
    auto kv = s.keys();
    kv.set("r", format_double(r));
    configs.push_back(core::SystemConfig::from_keys(kv));
  }
  ssc::SSCOptions o;
  o.T = s.number("ssc_T", 10.0);
  o.reps = s.count("reps", 30);
  o.grid_points = s.count("grid_points", 20000);
  const auto table = ssc::ssc_convergence(configs, o);

  Table t{{"r", "rep", "g_supnorm", "z_supnorm", "ratio"}, {}};
  for (const auto& row : table.rows)
    t.add({num(row.r), num(row.rep), num(row.g_supnorm), num(row.z_supnorm), num(row.ratio)});
  out.table("ssc", t);

  // Almost-Lipschitz diagnostic on one path at the largest scale.
  const auto& big = configs.back();
  core::RngStream root(big.seed);
  const auto system = core::realize(big, root);
  sim::RunOptions ro;
  ro.horizon = o.T + 1.0;
  ro.grid_points = o.grid_points;
  ro.record_waits = false;
  const auto path = sim::run(big, system, ro);
  const double L = s.number("hydro_L", 1.0);
  const auto windows = ssc::hydro_windows(path, big.r, o.T, L);
  const double lip = ssc::almost_lipschitz_check(windows, s.number("lip_const", 4.0 * big.lambda_r),
                                                 s.number("lip_eps", 0.1));

  const auto spec = ssc::SSCFunctionSpec::from(big);
  json j;
  j["beta"] = spec.beta;
  j["mu"] = spec.mu;
  j["gamma_I"] = spec.gamma_I;
  j["T"] = o.T;
  j["reps"] = o.reps;
  json rows = json::array();
  for (const auto& m : table.summary)
    rows.push_back({{"r", m.r},
                    {"median_ratio", m.median_ratio},
                    {"q1_ratio", m.q1_ratio},
                    {"q3_ratio", m.q3_ratio},
                    {"median_g", m.median_g},
                    {"median_z", m.median_z}});
  j["summary"] = rows;
  j["lipschitz"] = {{"r", big.r}, {"windows", windows.size()}, {"exceedance", lip}};
  out.document("ssc_summary.json", j);
  report["summary"] = rows;
  return 0;
}

int cmd_fairness(Settings& s, Outputs& out, json& report) {
  const auto c = core::SystemConfig::from_keys(s.keys());
  auto options = run_options(s, c);
  options.record_servers = true;
  const double w = warmup(s);
  const std::size_t reps = s.count("reps", 1);
  require(reps >= 1, ErrorCode::ConfigError, "key 'reps': need at least one replication");
  const auto law = c.rate_law();
  const auto bins = ssc::default_bins(law, s.count("fairness_bins", 10));

  std::vector<ssc::FairnessEstimate> parts(reps);
  sim::parallel_for(reps, 0, [&](std::size_t i) {
    core::SystemConfig cfg = c;
    if (reps > 1) cfg.seed = sim::replication_stream(c.seed, i).key();
    core::RngStream root(cfg.seed);
    const auto system = core::realize(cfg, root);
    parts[i] = ssc::fairness_estimate(sim::run(cfg, system, options), law, bins, w);
  });
  const auto f = ssc::pool_fairness(parts);

  Table t{{"bin_lo", "bin_hi", "eta_hat", "eta_theory"}, {}};
  for (std::size_t b = 0; b < f.bins.size(); ++b)
    t.add({num(f.bins[b].lo), num(f.bins[b].hi), num(f.eta_hat[b]), num(f.eta_theory[b])});
  out.table("fairness", t);
  json j = system_json(c);
  j["reps"] = reps;
  j["max_error"] = f.max_error;
  j["discrepancy"] = f.discrepancy;
  j["idle_mass"] = f.idle_mass;
  out.document("fairness_summary.json", j);
  report["max_error"] = f.max_error;
  return 0;
}

int cmd_couple(Settings& s, Outputs& out, json& report) {
  const auto c = core::SystemConfig::from_keys(s.keys());
  core::RngStream root(c.seed);
  const auto system = core::realize(c, root);
  const double p = s.number("p_rate", c.rate_law().lower());
  const double horizon = s.number("horizon", std::numeric_limits<double>::max());
  const std::size_t events = s.count("skeleton_events", 10000);
  const auto path = sim::coupled_run(c, p, system, horizon, events);
  Table t{{"t", "D_hom", "D_het"}, {}};
  for (const auto& pt : path.points) t.add({num(pt.t), num(pt.d_hom), num(pt.d_het)});
  out.table("coupled", t);
  json j = system_json(c);
  j["p_rate"] = path.p_rate;
  j["q_rate"] = path.q_rate;
  j["skeleton_points"] = path.points.size();
  j["arrivals"] = path.arrivals;
  j["ordered"] = path.ordered();
  out.document("couple_summary.json", j);
  report["ordered"] = path.ordered();
  return 0;
}

using Command = std::function<int(Settings&, Outputs&, json&)>;

const std::map<std::string, Command>& command_table() {
  static const std::map<std::string, Command> table = {
      {"simulate", cmd_simulate}, {"analyze", cmd_analyze}, {"staff", cmd_staff},       {"ql-sweep", cmd_ql_sweep},
      {"ssc", cmd_ssc},           {"fairness", cmd_fairness}, {"couple", cmd_couple}};
  return table;
}

core::KeyValues gather(const Invocation& inv) {
  core::KeyValues kv = inv.config_path.empty() ? core::KeyValues{} : core::KeyValues::load(inv.config_path);
  for (const auto& o : inv.overrides) {
    const auto eq = o.find('=');
    require(eq != std::string::npos, ErrorCode::ConfigError, "override '" + o + "': expected key=value");
    kv.set(core::strip(o.substr(0, eq)), o.substr(eq + 1));
  }
  if (inv.seed) kv.set("seed", std::to_string(*inv.seed));
  if (inv.reps) kv.set("reps", std::to_string(*inv.reps));
  return kv;
}

int run_command(const Invocation& inv, const core::KeyValues& kv, std::ostream& out,
                std::vector<Outputs::File>* files) {
  const auto& table = command_table();
  const auto it = table.find(inv.command);
  require(it != table.end(), ErrorCode::ConfigError, "unknown command '" + inv.command + "'");
  require(inv.format == "csv" || inv.format == "json", ErrorCode::ConfigError,
          "--format: expected csv or json, got '" + inv.format + "'");

  const fs::path dir(inv.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(fs::is_directory(dir), ErrorCode::ConfigError, "output directory '" + inv.out_dir + "' is not usable");

  Settings settings(kv);
  Outputs outputs(dir, inv.format);
  json report;
  const int status = it->second(settings, outputs, report);

  json manifest;
  manifest["command"] = inv.command;
  manifest["format"] = inv.format;
  manifest["seed"] = kv.has("seed") ? core::parse_u64(kv.get("seed"), "seed") : core::SystemConfig{}.seed;
  json config = json::object();
  for (const auto& [k, v] : settings.resolved()) config[k] = v;
  manifest["config"] = config;
  json artifacts = json::array();
  for (const auto& f : outputs.files())
    artifacts.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  manifest["artifacts"] = artifacts;
  {
    std::ofstream mf(dir / "manifest.json", std::ios::binary);
    mf << manifest.dump(2) << "\n";
    require(static_cast<bool>(mf), ErrorCode::ConfigError, "cannot write manifest.json");
  }
  if (files) *files = outputs.files();

  out << inv.command << ": " << report.dump() << "\n";
  for (const auto& f : outputs.files()) out << "  " << (dir / f.name).string() << "\n";
  return status;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"simulate", "analyze", "staff", "ql-sweep",
                                                 "ssc",      "fairness", "couple"};
  return names;
}

int exit_code(ErrorCode code) { return code == ErrorCode::ConfigError ? 2 : 3; }

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < length; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

int dispatch(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    return run_command(inv, gather(inv), out, nullptr);
  } catch (const Error& e) {
    err << "hetq " << inv.command << ": " << e.what() << "\n";
    return exit_code(e.code());
  }
}

int rerun(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(manifest_path);
    require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot read manifest '" + manifest_path + "'");
    json manifest;
    try {
      manifest = json::parse(in);
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigError, std::string("manifest is not valid JSON: ") + e.what());
    }
    Invocation inv;
    inv.command = manifest.at("command").get<std::string>();
    inv.format = manifest.at("format").get<std::string>();
    inv.out_dir = out_dir;
    core::KeyValues kv;
    for (const auto& [k, v] : manifest.at("config").items()) kv.set(k, v.get<std::string>());

    std::vector<Outputs::File> files;
    const int status = run_command(inv, kv, out, &files);
    std::map<std::string, std::string> fresh;
    for (const auto& f : files) fresh[f.name] = f.sha256;
    int mismatches = 0;
    for (const auto& a : manifest.at("artifacts")) {
      const auto name = a.at("file").get<std::string>();
      const auto it = fresh.find(name);
      if (it == fresh.end() || it->second != a.at("sha256").get<std::string>()) {
        err << "mismatch: " << name << "\n";
        ++mismatches;
      }
    }
    out << "rerun: " << manifest.at("artifacts").size() - mismatches << "/" << manifest.at("artifacts").size()
        << " artifacts identical\n";
    return mismatches > 0 ? 1 : status;
  } catch (const Error& e) {
    err << "hetq rerun: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "hetq rerun: CONFIG_ERROR: malformed manifest: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace hetq::cli
