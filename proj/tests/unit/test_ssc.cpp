#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hetq/error.hpp"
#include "hetq/ssc/ssc.hpp"

using namespace hetq;
using namespace hetq::ssc;

namespace {

core::SystemConfig make(const std::string& text) { return core::SystemConfig::from_keys(core::KeyValues::parse(text)); }

sim::PathRecord simulate(const core::SystemConfig& c, double horizon, std::size_t grid, bool servers = false) {
  core::RngStream root(c.seed);
  const auto sys = core::realize(c, root);
  sim::RunOptions o;
  o.horizon = horizon;
  o.grid_points = grid;
  o.record_servers = servers;
  o.record_waits = false;
  return sim::run(c, sys, o);
}

}  // namespace

TEST_CASE("SSC function") {
  const auto spec = SSCFunctionSpec::make({0.5, 0.5}, {1.0, 2.0});
  CHECK(spec.gamma_I == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(ssc_g(spec, 0.0, {1.0, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(ssc_g(spec, 3.0, {0.0, 0.0}) == 0.0);

  SUBCASE("single pool collapses") {
    const auto one = SSCFunctionSpec::make({1.0}, {1.7});
    for (double z : {-3.0, 0.1, 12.5}) CHECK(ssc_g(one, 1.0, {z}) == 0.0);
  }
  SUBCASE("homogeneous of degree one") {
    const auto s3 = SSCFunctionSpec::make({0.2, 0.3, 0.5}, {0.5, 1.0, 3.0});
    const std::vector<double> z = {-1.3, 0.4, 2.2};
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
      std::vector<double> az = z;
      for (double& v : az) v *= a;
      CHECK(ssc_g(s3, a * 0.7, az) == doctest::Approx(a * ssc_g(s3, 0.7, z)).epsilon(1e-14));
    }
  }
  SUBCASE("vanishes on its kernel") {
    const auto s3 = SSCFunctionSpec::make({0.2, 0.3, 0.5}, {0.5, 1.0, 3.0});
    // z_3 solves sum z_i (mu_i - gamma) = 0 for free z_1, z_2.
    for (double z1 : {-2.0, 0.5}) {
      const double z2 = 1.25;
      const double z3 = -(z1 * (0.5 - s3.gamma_I) + z2 * (1.0 - s3.gamma_I)) / (3.0 - s3.gamma_I);
      CHECK(ssc_g(s3, 0.0, {z1, z2, z3}) < 1e-14);
    }
    // LISF idle split proportional to beta_i mu_i lies on the kernel.
    CHECK(ssc_g(spec, 0.0, {-0.5 * 1.0, -0.5 * 2.0}) < 1e-15);
  }
  SUBCASE("construction checks") {
    CHECK_THROWS_AS(SSCFunctionSpec::make({0.5, 0.5}, {1.0, 1.0}), Error);
    CHECK_THROWS_AS(SSCFunctionSpec::make({0.5, 0.4}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(SSCFunctionSpec::make({0.5, 0.5}, {1.0, 2.0}, 1.6), Error);
    CHECK_NOTHROW(SSCFunctionSpec::make({0.5, 0.5}, {1.0, 2.0}, 5.0 / 3.0));
    CHECK_THROWS_AS(make("r = 10\npools = 0.5:1,0.5:1"), Error);
  }
}

TEST_CASE("hydrodynamic scaling") {
  SUBCASE("all busy path") {
    sim::PathRecord p;
    p.n = 16;
    p.pool_sizes = {6, 10};
    p.end_time = 10.0;
    p.Z = {{}, {}};
    for (int j = 0; j <= 100; ++j) {
      p.t.push_back(0.1 * j);
      p.Q.push_back(3);
      p.X.push_back(19);
      p.Z[0].push_back(6);
      p.Z[1].push_back(10);
    }
    const auto h = hydro_scale(p, 16.0, 2, 1.0);
    CHECK(h.x_rm == 16.0);
    CHECK(h.start == 0.5);
    CHECK(h.stretch == 0.25);
    for (const auto& z : h.Z)
      for (double v : z) CHECK(v == 0.0);
    for (double q : h.Q) CHECK(q == 0.75);
    CHECK(h.t.back() <= 1.0);
    CHECK_THROWS_AS(hydro_scale(p, 16.0, 2, 100.0), Error);
    try {
      hydro_scale(p, 16.0, 200, 1.0);
      FAIL("expected WINDOW_ERROR");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::WindowError);
    }
  }
  SUBCASE("recomputed by hand") {
    const auto c = make("r = 100\npools = 0.5:1,0.5:2\nseed = 7");
    const auto p = simulate(c, 5.0, 5001);
    const std::size_t m = 20;
    const auto h = hydro_scale(p, c.r, m, 1.0);
    const double n = static_cast<double>(p.n);
    const double s = m / std::sqrt(n);
    std::size_t j0 = 0;
    while (j0 + 1 < p.samples() && p.t[j0 + 1] <= s) ++j0;
    const double d1 = double(p.Z[0][j0]) - double(p.pool_sizes[0]);
    const double d2 = double(p.Z[1][j0]) - double(p.pool_sizes[1]);
    const double x = std::max(d1 * d1 + d2 * d2, n);
    CHECK(h.x_rm == doctest::Approx(x).epsilon(1e-12));
    for (std::size_t k : {std::size_t{1}, h.t.size() / 2, h.t.size() - 1}) {
      const std::size_t j = j0 + k;
      CHECK(h.t[k] == doctest::Approx((p.t[j] - s) * n / std::sqrt(x)).epsilon(1e-12));
      CHECK(h.Q[k] == doctest::Approx(p.Q[j] / std::sqrt(x)).epsilon(1e-12));
      CHECK(h.Z[1][k] == doctest::Approx((p.Z[1][j] - double(p.pool_sizes[1])) / std::sqrt(x)).epsilon(1e-12));
    }
    const auto first = hydro_scale(p, c.r, 0, 1.0);
    double norm = first.Q[0] * first.Q[0];
    for (const auto& z : first.Z) norm += z[0] * z[0];
    CHECK(norm == 0.0);
  }
}

TEST_CASE("almost Lipschitz diagnostic") {
  HydroScaledPath flat;
  flat.t = {0.0, 0.5, 1.0};
  flat.Q = {0.2, 0.2, 0.2};
  flat.Z = {{0.1, 0.1, 0.1}};
  CHECK(almost_lipschitz_check({flat}, 1e-6, 0.0) == 0.0);
  HydroScaledPath bumpy = flat;
  bumpy.Q = {0.2, 0.3, 0.2};
  CHECK(almost_lipschitz_check({bumpy}, 0.0, 0.0) > 0.0);

  const auto c = make("r = 400\npools = 0.5:1,0.5:2\nseed = 3");
  const auto p = simulate(c, 3.0, 30001);
  const auto windows = hydro_windows(p, c.r, 1.0, 1.0);
  CHECK(windows.size() == 21);
  CHECK(almost_lipschitz_check(windows, 4.0 * c.lambda_r, 0.1) < 0.05);
}

TEST_CASE("SSC convergence table") {
  SSCOptions o;
  o.T = 2.0;
  o.reps = 4;
  o.grid_points = 2001;
  SUBCASE("one pool gives zero ratio") {
    const auto t = ssc_convergence({make("r = 25\npools = 1:1.5"), make("r = 100\npools = 1:1.5")}, o);
    CHECK(t.rows.size() == 8);
    for (const auto& row : t.rows) CHECK(row.ratio == 0.0);
  }
  SUBCASE("rows and summaries") {
    const auto t = ssc_convergence({make("r = 25\npools = 0.5:1,0.5:2"), make("r = 100\npools = 0.5:1,0.5:2")}, o);
    REQUIRE(t.summary.size() == 2);
    CHECK(t.summary[0].r == 25.0);
    CHECK(t.summary[0].q1_ratio <= t.summary[0].median_ratio);
    CHECK(t.summary[0].median_ratio <= t.summary[0].q3_ratio);
    for (const auto& row : t.rows) {
      CHECK(row.ratio == doctest::Approx(row.g_supnorm / std::max(row.z_supnorm, 1.0)));
      CHECK(row.ratio >= 0.0);
    }
    o.threads = 1;
    const auto again = ssc_convergence({make("r = 25\npools = 0.5:1,0.5:2"), make("r = 100\npools = 0.5:1,0.5:2")}, o);
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(again.rows[i].ratio == t.rows[i].ratio);
  }
  SUBCASE("mismatched pools") {
    CHECK_THROWS_AS(ssc_convergence({make("r = 25\npools = 0.5:1,0.5:2"), make("r = 100\npools = 0.5:1,0.5:3")}, o),
                    Error);
    CHECK_THROWS_AS(ssc_convergence({make("r = 25")}, o), Error);
  }
}

TEST_CASE("fairness bins") {
  const auto u = core::RateDistribution::uniform(0.5, 1.5);
  const auto bins = default_bins(u);
  REQUIRE(bins.size() == 10);
  CHECK(bins.front().lo == 0.5);
  CHECK(bins.back().hi == 1.5);
  CHECK(bin_index(bins, 1.5) == 9);
  CHECK(bin_index(bins, 0.5) == 0);
  CHECK(bin_index(bins, 1.6) == 10);
  double total = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) total += eta_theory(core::Policy::LISF, u, bins, b);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  const auto d = core::RateDistribution::discrete({{1.0, 0.5}, {2.0, 0.5}});
  const auto db = default_bins(d);
  REQUIRE(db.size() == 2);
  CHECK(db[0].hi == 1.5);
  CHECK(eta_theory(core::Policy::FSF, d, db, 0) == 1.0);
  CHECK(eta_theory(core::Policy::LISF, d, db, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("fairness estimates") {
  const auto c = make("N = 100\nlambda = 90\nrates = uniform(0.5,1.5)\nseed = 11");
  const auto p = simulate(c, 100.0, 2001, true);
  const auto law = c.rate_law();
  SUBCASE("single bin is exact") {
    const auto f = fairness_estimate(p, law, {{0.5, 1.5}});
    CHECK(f.eta_hat[0] == 1.0);
    CHECK(f.eta_theory[0] == 1.0);
  }
  SUBCASE("refinement keeps the total") {
    for (std::size_t k : {2, 5, 10, 40}) {
      const auto f = fairness_estimate(p, law, default_bins(law, k));
      CHECK(std::accumulate(f.eta_hat.begin(), f.eta_hat.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("pooling") {
    const auto f = fairness_estimate(p, law, default_bins(law));
    const auto g = pool_fairness({f, f});
    CHECK(g.eta_hat == f.eta_hat);
    CHECK(g.idle_mass == 2.0 * f.idle_mass);
  }
  SUBCASE("saturated path") {
    const auto s = simulate(make("N = 10\nlambda = 30\nrates = uniform(0.5,1.5)"), 20.0, 201, true);
    try {
      fairness_estimate(s, law, default_bins(law), 0.5);
      FAIL("expected NO_IDLENESS");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoIdleness);
    }
  }
  SUBCASE("needs server records") {
    CHECK_THROWS_AS(fairness_estimate(simulate(c, 10.0, 101), law, default_bins(law)), Error);
  }
}

TEST_CASE("static planning") {
  const auto p = static_planning_inverted_v({0.5, 0.5}, {1.0, 2.0}, 1.2);
  CHECK(p.rho_star == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(p.x_star == std::vector<double>{p.rho_star, p.rho_star});
  CHECK_FALSE(p.heavy_traffic);
  CHECK(static_planning_inverted_v({0.5, 0.5}, {1.0, 2.0}, 1.5).heavy_traffic);
  CHECK(static_planning_inverted_v({0.5, 0.5}, {1.0, 2.0}, 0.0).rho_star == 0.0);
  const double base = static_planning_inverted_v({0.3, 0.7}, {0.5, 4.0}, 2.0).rho_star;
  CHECK(static_planning_inverted_v({0.3, 0.7}, {0.5, 4.0}, 6.0).rho_star == doctest::Approx(3.0 * base));
  CHECK(static_planning_inverted_v({0.3, 0.7}, {2.5, 20.0}, 2.0).rho_star == doctest::Approx(base / 5.0));
}
