#include <sstream>

#include "hetq/core/text.hpp"
#include "hetq/sim/sim.hpp"
#include "json.hpp"

namespace hetq::sim {

using core::format_double;

std::string path_csv(const PathRecord& path) {
  std::ostringstream os;
  os << "t,X,Q";
  for (std::size_t i = 0; i < path.pool_count(); ++i) os << ",Z_" << (i + 1);
  os << ",R,A\n";
  for (std::size_t j = 0; j < path.samples(); ++j) {
    os << format_double(path.t[j]) << ',' << path.X[j] << ',' << path.Q[j];
    for (const auto& z : path.Z) os << ',' << z[j];
    os << ',' << path.R[j] << ',' << path.A[j] << '\n';
  }
  return os.str();
}

std::string path_summary_json(const PathRecord& path, const SteadyEstimates& e) {
  nlohmann::ordered_json j;
  j["seed"] = path.seed;
  j["N"] = path.n;
  j["r"] = path.r;
  j["lambda"] = path.lambda;
  j["nu"] = path.nu;
  j["policy"] = core::to_string(path.policy);
  j["abandon_mode"] = core::to_string(path.mode);
  j["status"] = path.status == RunStatus::Ok ? "ok" : "OVERFLOW_GUARD";
  j["end_time"] = path.end_time;
  j["counts"] = {{"arrivals", path.total_arrivals},
                 {"abandonments", path.total_abandonments},
                 {"departures", path.departures.empty() ? 0 : path.departures.back()},
                 {"server_departures", path.server_departures}};
  j["estimates"] = {{"window_start", e.window_start}, {"window_end", e.window_end},
                    {"p_wait", e.p_wait},             {"p_wait_se", e.p_wait_se},
                    {"mean_Q", e.mean_Q},             {"mean_Q_se", e.mean_Q_se},
                    {"p_full", e.p_full},             {"abandon_rate", e.abandon_rate}};
  j["rates"] = path.rates;
  j["busy_time"] = path.busy_time;
  return j.dump(2) + "\n";
}

}  // namespace hetq::sim
