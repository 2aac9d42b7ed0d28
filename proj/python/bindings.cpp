#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "hetq/cli/app.hpp"
#include "hetq/core/config.hpp"
#include "hetq/diffusion/diffusion.hpp"
#include "hetq/sim/sim.hpp"
#include "hetq/ssc/ssc.hpp"
#include "hetq/staffing/staffing.hpp"

namespace py = pybind11;
using namespace hetq;

namespace {

core::KeyValues to_keys(const std::map<std::string, std::string>& entries) {
  core::KeyValues kv;
  for (const auto& [k, v] : entries) kv.set(k, v);
  return kv;
}

template <class T>
py::array_t<T> as_array(const std::vector<T>& v) {
  py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

py::array_t<std::int64_t> pool_matrix(const sim::PathRecord& p) {
  const auto pools = p.pool_count();
  const auto n = p.samples();
  py::array_t<std::int64_t> out({static_cast<py::ssize_t>(pools), static_cast<py::ssize_t>(n)});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pools; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = p.Z[i][j];
  return out;
}

}  // namespace

PYBIND11_MODULE(_hetq, m) {
  m.doc() = "Heterogeneous many-server queues: diffusion limits, simulation, staffing.";

  static py::exception<Error> error(m, "HetqError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<core::RateDistribution>(m, "RateDistribution")
      .def_static("parse", &core::RateDistribution::parse)
      .def_static("uniform", &core::RateDistribution::uniform)
      .def_static("point", &core::RateDistribution::point)
      .def_static("discrete",
                  [](const std::vector<std::pair<double, double>>& atoms) {
                    std::vector<core::Atom> a;
                    for (const auto& [x, p] : atoms) a.push_back({x, p});
                    return core::RateDistribution::discrete(std::move(a));
                  })
      .def_property_readonly("lower", &core::RateDistribution::lower)
      .def_property_readonly("upper", &core::RateDistribution::upper)
      .def_property_readonly("mean", &core::RateDistribution::mean)
      .def_property_readonly("variance", &core::RateDistribution::variance)
      .def_property_readonly("second_moment", &core::RateDistribution::second_moment)
      .def("mass", &core::RateDistribution::mass)
      .def("first_moment", &core::RateDistribution::first_moment)
      .def("__repr__", &core::RateDistribution::to_string);

  py::class_<core::SystemConfig>(m, "SystemConfig")
      .def_static(
          "from_keys", [](const std::map<std::string, std::string>& e) { return core::SystemConfig::from_keys(to_keys(e)); },
          py::arg("entries"))
      .def_readonly("r", &core::SystemConfig::r)
      .def_readonly("lambda_r", &core::SystemConfig::lambda_r)
      .def_readonly("arrival_scv", &core::SystemConfig::arrival_scv)
      .def_readonly("nu", &core::SystemConfig::abandon_rate)
      .def_readonly("seed", &core::SystemConfig::seed)
      .def_property_readonly("policy", [](const core::SystemConfig& c) { return core::to_string(c.policy); })
      .def_property_readonly("rate_law", &core::SystemConfig::rate_law)
      .def_property_readonly("mu_bar", &core::SystemConfig::mu_bar)
      .def_property_readonly("servers", &core::SystemConfig::servers)
      .def_property_readonly("inverted_v", &core::SystemConfig::inverted_v);

  py::class_<core::RealizedSystem>(m, "RealizedSystem")
      .def_readonly("n", &core::RealizedSystem::n)
      .def_readonly("mu", &core::RealizedSystem::mu)
      .def_readonly("sum_mu", &core::RealizedSystem::sum_mu)
      .def_readonly("mu_bar", &core::RealizedSystem::mu_bar)
      .def_readonly("zeta_hat", &core::RealizedSystem::zeta_hat)
      .def_readonly("pool_sizes", &core::RealizedSystem::pool_sizes);

  m.def(
      "realize",
      [](const core::SystemConfig& c) {
        core::RngStream root(c.seed);
        return core::realize(c, root);
      },
      "Server rates drawn from the config seed.");
  m.def("staffing_level", [](double lambda, double mu_bar, double theta) {
    return core::staffing_level(lambda, mu_bar, core::Staffing::halfin_whitt(theta));
  });

  // Diffusion.
  py::class_<diffusion::DiffusionParams>(m, "DiffusionParams")
      .def(py::init([](double sigma, double beta, double gamma, double nu) {
             diffusion::DiffusionParams p{sigma, beta, gamma, nu};
             p.validate();
             return p;
           }),
           py::arg("sigma"), py::arg("beta"), py::arg("gamma"), py::arg("nu") = 0.0)
      .def_readonly("sigma", &diffusion::DiffusionParams::sigma)
      .def_readonly("beta", &diffusion::DiffusionParams::beta)
      .def_readonly("gamma", &diffusion::DiffusionParams::gamma)
      .def_readonly("nu", &diffusion::DiffusionParams::nu);

  py::class_<diffusion::SteadyStateDensity>(m, "SteadyStateDensity")
      .def_readonly("varrho", &diffusion::SteadyStateDensity::varrho)
      .def("pdf", py::vectorize(&diffusion::SteadyStateDensity::pdf))
      .def("cdf", py::vectorize(&diffusion::SteadyStateDensity::cdf))
      .def("mean_positive_part", &diffusion::SteadyStateDensity::mean_positive_part);

  m.def("diffusion_sigma", &diffusion::diffusion_sigma, py::arg("mu_bar"), py::arg("arrival_scv"));
  m.def(
      "idleness_gamma",
      [](const core::RateDistribution& d, const std::string& policy) {
        return diffusion::idleness_gamma(core::rate_moments(d), core::parse_policy(policy));
      },
      py::arg("law"), py::arg("policy"));
  m.def("prob_wait_no_aband", &diffusion::prob_wait_no_aband, py::arg("beta"), py::arg("sigma"), py::arg("gamma"));
  m.def("prob_wait_aband", &diffusion::prob_wait_aband, py::arg("beta"), py::arg("sigma"), py::arg("gamma"),
        py::arg("nu"));
  m.def("stationary", &diffusion::stationary);
  m.def("expected_positive_part", &diffusion::expected_positive_part);
  m.def(
      "ql_eps",
      [](double eps, double mu_bar, double sigma, double theta, double nu, const std::string& policy) {
        return diffusion::ql_eps(eps, mu_bar, sigma, theta, nu, core::parse_policy(policy));
      },
      py::arg("eps"), py::arg("mu_bar"), py::arg("sigma"), py::arg("theta"), py::arg("nu"), py::arg("policy"));

  // Staffing.
  py::class_<staffing::ErlangResult>(m, "ErlangResult")
      .def_readonly("p_wait", &staffing::ErlangResult::p_wait)
      .def_readonly("mean_Q", &staffing::ErlangResult::mean_Q)
      .def_readonly("mean_W", &staffing::ErlangResult::mean_W)
      .def_readonly("abandon_prob", &staffing::ErlangResult::abandon_prob);
  m.def("erlang_c", &staffing::erlang_c, py::arg("n"), py::arg("lambda_"), py::arg("mu"));
  m.def("erlang_a", &staffing::erlang_a, py::arg("n"), py::arg("lambda_"), py::arg("mu"), py::arg("nu"));

  py::class_<staffing::OptimizationResult>(m, "OptimizationResult")
      .def_readonly("x_star", &staffing::OptimizationResult::x_star)
      .def_readonly("cost_at_optimum", &staffing::OptimizationResult::cost_at_optimum)
      .def_readonly("cost_curve", &staffing::OptimizationResult::cost_curve)
      .def_readonly("unimodal", &staffing::OptimizationResult::unimodal);
  m.def(
      "optimize_staffing",
      [](const core::SystemConfig& c, const std::string& model, double c_s, double c_w, double d, double x_lo,
         double x_hi, double tol) {
        require(model == "aband" || model == "no_aband", ErrorCode::ConfigError,
                "cost model: expected aband or no_aband, got '" + model + "'");
        const auto law = c.rate_law();
        staffing::CostSpec spec;
        spec.c_s = c_s;
        spec.waiting = staffing::DelayCost::linear(c_w);
        spec.d = d;
        spec.nu = c.abandon_rate;
        auto cost = [&](double x) {
          return model == "aband" ? staffing::cost_aband(x, c, law, spec).total
                                  : staffing::cost_no_aband(x, c, law, spec).total;
        };
        return staffing::optimize_staffing(cost, x_lo, x_hi, tol);
      },
      py::arg("config"), py::arg("model") = "aband", py::arg("c_s") = 1.0, py::arg("c_w") = 1.0, py::arg("d") = 1.0,
      py::arg("x_lo") = 0.05, py::arg("x_hi") = 4.0, py::arg("tol") = 1e-4);

  // Simulation.
  py::class_<sim::PathRecord>(m, "PathRecord")
      .def_readonly("n", &sim::PathRecord::n)
      .def_readonly("end_time", &sim::PathRecord::end_time)
      .def_readonly("total_arrivals", &sim::PathRecord::total_arrivals)
      .def_readonly("total_abandonments", &sim::PathRecord::total_abandonments)
      .def_readonly("rates", &sim::PathRecord::rates)
      .def_property_readonly("overflow", [](const sim::PathRecord& p) { return p.status == sim::RunStatus::Overflow; })
      .def_property_readonly("t", [](const sim::PathRecord& p) { return as_array(p.t); })
      .def_property_readonly("X", [](const sim::PathRecord& p) { return as_array(p.X); })
      .def_property_readonly("Q", [](const sim::PathRecord& p) { return as_array(p.Q); })
      .def_property_readonly("R", [](const sim::PathRecord& p) { return as_array(p.R); })
      .def_property_readonly("A", [](const sim::PathRecord& p) { return as_array(p.A); })
      .def_property_readonly("Z", &pool_matrix)
      .def("csv", &sim::path_csv);

  py::class_<sim::SteadyEstimates>(m, "SteadyEstimates")
      .def_readonly("p_wait", &sim::SteadyEstimates::p_wait)
      .def_readonly("p_wait_se", &sim::SteadyEstimates::p_wait_se)
      .def_readonly("mean_Q", &sim::SteadyEstimates::mean_Q)
      .def_readonly("mean_Q_se", &sim::SteadyEstimates::mean_Q_se)
      .def_readonly("p_full", &sim::SteadyEstimates::p_full)
      .def_readonly("abandon_rate", &sim::SteadyEstimates::abandon_rate)
      .def_readonly("arrivals", &sim::SteadyEstimates::arrivals);

  m.def(
      "simulate",
      [](const core::SystemConfig& c, double horizon, const std::string& mode, std::size_t grid_points,
         bool record_servers) {
        core::RngStream root(c.seed);
        const auto system = core::realize(c, root);
        sim::RunOptions o;
        o.horizon = horizon;
        o.mode = core::parse_abandon_mode(mode);
        o.grid_points = grid_points;
        o.record_servers = record_servers;
        o.record_waits = false;
        py::gil_scoped_release release;
        return sim::run(c, system, o);
      },
      py::arg("config"), py::arg("horizon") = 1000.0, py::arg("mode") = "none", py::arg("grid_points") = 10000,
      py::arg("record_servers") = false);
  m.def("steady_estimates", &sim::steady_estimates, py::arg("path"), py::arg("warmup") = 0.2,
        py::arg("batches") = 20);

  // State-space collapse and fairness.
  m.def(
      "ssc_g",
      [](const std::vector<double>& beta, const std::vector<double>& mu, double q, const std::vector<double>& z) {
        return ssc::ssc_g(ssc::SSCFunctionSpec::make(beta, mu), q, z);
      },
      py::arg("beta"), py::arg("mu"), py::arg("q"), py::arg("z"));

  py::class_<ssc::StaticPlan>(m, "StaticPlan")
      .def_readonly("rho_star", &ssc::StaticPlan::rho_star)
      .def_readonly("x_star", &ssc::StaticPlan::x_star)
      .def_readonly("heavy_traffic", &ssc::StaticPlan::heavy_traffic);
  m.def("static_planning_inverted_v", &ssc::static_planning_inverted_v, py::arg("beta"), py::arg("mu"),
        py::arg("lambda_"));

  py::class_<ssc::FairnessEstimate>(m, "FairnessEstimate")
      .def_property_readonly("bins",
                             [](const ssc::FairnessEstimate& f) {
                               std::vector<std::pair<double, double>> b;
                               for (const auto& x : f.bins) b.emplace_back(x.lo, x.hi);
                               return b;
                             })
      .def_readonly("eta_hat", &ssc::FairnessEstimate::eta_hat)
      .def_readonly("eta_theory", &ssc::FairnessEstimate::eta_theory)
      .def_readonly("max_error", &ssc::FairnessEstimate::max_error)
      .def_readonly("discrepancy", &ssc::FairnessEstimate::discrepancy);
  m.def(
      "fairness_estimate",
      [](const sim::PathRecord& path, const core::RateDistribution& law, std::size_t bins, double warmup) {
        return ssc::fairness_estimate(path, law, ssc::default_bins(law, bins), warmup);
      },
      py::arg("path"), py::arg("law"), py::arg("bins") = 10, py::arg("warmup") = 0.1);

  // Command-line entry point.
  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_path, const std::string& out_dir,
         const std::vector<std::string>& overrides, const std::string& format, std::optional<std::uint64_t> seed,
         std::optional<std::size_t> reps) {
        cli::Invocation inv{command, config_path, out_dir, overrides, format, seed, reps};
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::dispatch(inv, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("command"), py::arg("config_path") = "", py::arg("out_dir") = ".",
      py::arg("overrides") = std::vector<std::string>{}, py::arg("format") = "csv", py::arg("seed") = py::none(),
      py::arg("reps") = py::none());
  m.attr("commands") = cli::commands();
}
