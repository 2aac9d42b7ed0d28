#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hetq/error.hpp"
#include "hetq/sim/sim.hpp"
#include "hetq/staffing/staffing.hpp"
#include "support/oracles.hpp"

using namespace hetq;
using namespace hetq::sim;

namespace {

core::SystemConfig make(const std::string& text) { return core::SystemConfig::from_keys(core::KeyValues::parse(text)); }

core::RealizedSystem draw(const core::SystemConfig& c) {
  core::RngStream root(c.seed);
  return core::realize(c, root);
}

void check_path_invariants(const PathRecord& p) {
  for (std::size_t j = 0; j < p.samples(); ++j) {
    const std::int64_t n = static_cast<std::int64_t>(p.n);
    CHECK(p.Q[j] == std::max<std::int64_t>(p.X[j] - n, 0));
    std::int64_t busy = 0;
    for (const auto& z : p.Z) busy += z[j];
    CHECK(busy == std::min(p.X[j], n));
    if (!p.idle.empty()) {
      std::int64_t idle = 0;
      for (std::size_t k = 0; k < p.n; ++k) idle += p.idle[j * p.n + k];
      CHECK(idle == n - busy);
      if (p.Q[j] > 0) CHECK(idle == 0);
    }
  }
}

}  // namespace

TEST_CASE("no arrivals drains the system") {
  const auto c = make("N = 20\nlambda = 0\nrates = uniform(0.5,1.5)");
  RunOptions o;
  o.horizon = 50.0;
  o.grid_points = 101;
  o.check_invariants = true;
  const auto p = run(c, draw(c), o);
  CHECK(p.X.front() == 20);
  CHECK(p.X.back() == 0);
  CHECK(p.A.back() == 0);
  CHECK(p.R.back() == 0);
  CHECK(std::is_sorted(p.X.rbegin(), p.X.rend()));
  check_path_invariants(p);
}

TEST_CASE("M/M/1 delay probability") {
  const auto c = make("N = 1\nlambda = 0.5\nrates = point(1)\nseed = 12");
  RunOptions o;
  o.horizon = 2e5;
  o.record_waits = false;
  const auto e = steady_estimates(run(c, draw(c), o), 0.1);
  CHECK(std::abs(e.p_wait - 0.5) < 3.0 * e.p_wait_se);
  CHECK(e.p_wait_se < 0.01);
}

TEST_CASE("M/M/N mean queue against Erlang-C") {
  const auto c = make("N = 100\nlambda = 90\nrates = point(1)\nseed = 3");
  RunOptions o;
  o.horizon = 3e4;
  o.record_waits = false;
  const auto e = steady_estimates(run(c, draw(c), o), 0.2);
  const auto exact = staffing::erlang_c(100, 90.0, 1.0);
  CHECK(std::abs(e.mean_Q - exact.mean_Q) < 0.05 * exact.mean_Q);
  CHECK(std::abs(e.p_wait - exact.p_wait) < 4.0 * e.p_wait_se);
}

TEST_CASE("conditional wait tail is exponential with rate H - lambda") {
  auto c = make("N = 100\nrates = uniform(0.8,1.2)\nseed = 21\nlambda = 1");
  const auto sys = draw(c);
  c.lambda_r = 0.9 * sys.sum_mu;
  RunOptions o;
  o.horizon = 60000.0;
  o.grid_points = 100;
  const auto p = run(c, sys, o);
  // Every tenth delayed customer, to thin out serial correlation.
  std::vector<double> waits;
  std::size_t delayed = 0;
  for (const auto& [arrival, w] : p.waits)
    if (arrival > 100.0 && w > 0.0 && delayed++ % 10 == 0) waits.push_back(w);
  REQUIRE(waits.size() >= 100000);
  waits.resize(100000);
  const double rate = sys.sum_mu - c.lambda_r;
  CHECK(oracle::ks_distance(waits, [&](double t) { return 1.0 - std::exp(-rate * t); }) < 0.02);
}

TEST_CASE("steady estimate bookkeeping") {
  SUBCASE("constant path") {
    PathRecord p;
    p.n = 10;
    p.r = 9.0;
    for (int j = 0; j < 11; ++j) {
      p.t.push_back(j);
      p.X.push_back(10);
      p.Q.push_back(0);
      p.R.push_back(0);
      p.A.push_back(0);
      p.delayed.push_back(0);
      p.departures.push_back(0);
      p.area_Q.push_back(0.0);
      p.area_full.push_back(j);
      p.events.push_back(j);
    }
    const auto e = steady_estimates(p, 0.2);
    CHECK(e.p_wait == 0.0);
    CHECK(e.mean_Q == 0.0);
    CHECK(e.scaled_X.size() == 9);
    for (double x : e.scaled_X) CHECK(x == 0.0);
    p.events.assign(11, 0);
    CHECK_THROWS_AS(steady_estimates(p, 0.2), Error);
    CHECK_THROWS_AS(steady_estimates(p, 1.0), Error);
  }
  SUBCASE("abandonment rate identity") {
    const auto c = make("r = 100\nnu = 1\ntheta = 0.2\nrates = uniform(0.8,1.2)");
    RunOptions o;
    o.horizon = 200.0;
    o.mode = core::AbandonMode::Perturbed;
    o.grid_points = 401;
    const auto p = run(c, draw(c), o);
    const auto e = steady_estimates(p, 0.25);
    CHECK(e.abandon_rate * (e.window_end - e.window_start) ==
          doctest::Approx(static_cast<double>(p.R.back() - p.R[100])).epsilon(1e-12));
    CHECK(e.window_start == 50.0);
  }
}

TEST_CASE("invariants hold event by event for every policy and mode") {
  for (const char* policy : {"LISF", "FSF", "RANDOM"}) {
    for (auto mode : {core::AbandonMode::None, core::AbandonMode::PerCustomer, core::AbandonMode::Perturbed}) {
      auto c = make(std::string("r = 50\ntheta = 0.3\nnu = 0.7\nrates = uniform(0.5,1.5)\npolicy = ") + policy);
      RunOptions o;
      o.horizon = 60.0;
      o.mode = mode;
      o.grid_points = 300;
      o.record_servers = true;
      o.check_invariants = true;
      o.initial_X = 30;
      const auto p = run(c, draw(c), o);
      CHECK(p.status == RunStatus::Ok);
      check_path_invariants(p);
      const std::int64_t d = std::accumulate(p.server_departures.begin(), p.server_departures.end(), std::int64_t{0});
      CHECK(p.X.back() == 30 + p.total_arrivals - d - p.total_abandonments);
      if (mode == core::AbandonMode::None) CHECK(p.total_abandonments == 0);
      else CHECK(p.total_abandonments > 0);
    }
  }
}

TEST_CASE("inverted-V pools") {
  const auto c = make("r = 25\npools = 0.5:1,0.5:2\npolicy = FSF");
  RunOptions o;
  o.horizon = 30.0;
  o.grid_points = 200;
  o.check_invariants = true;
  o.initial_X = 0;
  const auto p = run(c, draw(c), o);
  CHECK(p.pool_count() == 2);
  check_path_invariants(p);
  const auto csv = path_csv(p);
  CHECK(csv.substr(0, csv.find('\n')) == "t,X,Q,Z_1,Z_2,R,A");
}

TEST_CASE("abandonment mode requires nu") {
  const auto c = make("r = 25");
  RunOptions o;
  o.mode = core::AbandonMode::PerCustomer;
  try {
    run(c, draw(c), o);
    FAIL("expected CONFIG_ERROR");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
}

TEST_CASE("overflow guard") {
  const auto c = make("N = 5\nlambda = 20\nrates = point(1)");
  RunOptions o;
  o.horizon = 1000.0;
  o.queue_cap = 50;
  const auto p = run(c, draw(c), o);
  CHECK(p.status == RunStatus::Overflow);
  CHECK(p.end_time < 1000.0);
  CHECK(p.Q.back() <= 50);
}

TEST_CASE("deterministic arrivals") {
  const auto c = make("N = 10\nlambda = 4\narrival_scv = 0\nrates = point(1)");
  RunOptions o;
  o.horizon = 10.0;
  o.grid_points = 11;
  const auto p = run(c, draw(c), o);
  for (std::size_t j = 0; j < p.samples(); ++j)
    CHECK(p.A[j] == static_cast<std::int64_t>(std::floor(4.0 * p.t[j] + 1e-9)));
}

TEST_CASE("arrival variability follows the configured scv") {
  for (double scv : {0.25, 1.0, 4.0}) {
    auto c = make("N = 1\nlambda = 1\nrates = point(1)");
    c.arrival_scv = scv;
    RunOptions o;
    o.horizon = 1e5;
    o.grid_points = 1001;
    o.record_waits = false;
    const auto p = run(c, draw(c), o);
    // Counts over windows of length 100 have variance ~ scv * 100.
    std::vector<double> counts;
    for (std::size_t j = 1; j < p.samples(); ++j) counts.push_back(static_cast<double>(p.A[j] - p.A[j - 1]));
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / counts.size();
    double var = 0.0;
    for (double x : counts) var += (x - mean) * (x - mean) / (counts.size() - 1);
    CHECK(mean == doctest::Approx(100.0).epsilon(0.02));
    CHECK(var / mean == doctest::Approx(scv).epsilon(0.2));
  }
}

TEST_CASE("runs are deterministic") {
  const auto c = make("r = 100\nrates = uniform(0.5,1.5)\nnu = 1\nseed = 99");
  RunOptions o;
  o.horizon = 20.0;
  o.mode = core::AbandonMode::PerCustomer;
  const auto a = run(c, draw(c), o);
  const auto b = run(c, draw(c), o);
  CHECK(path_csv(a) == path_csv(b));
  CHECK(a.waits == b.waits);
  auto c2 = c;
  c2.seed = 100;
  CHECK(path_csv(run(c2, draw(c2), o)) != path_csv(a));
}

TEST_CASE("replicate") {
  const auto c = make("r = 100\nrates = uniform(0.5,1.5)\nseed = 5");
  RunOptions o;
  o.horizon = 50.0;
  o.grid_points = 500;
  SUBCASE("single replication matches a direct run") {
    const auto reps = replicate(c, o, 1, 0.2, 1);
    auto direct = c;
    direct.seed = replication_stream(c.seed, 0).key();
    const auto e = steady_estimates(run(direct, draw(direct), o), 0.2);
    CHECK(reps[0].estimates.p_wait == e.p_wait);
    CHECK(reps[0].estimates.mean_Q == e.mean_Q);
    CHECK(reps[0].estimates.scaled_X == e.scaled_X);
  }
  SUBCASE("schedule independence") {
    const auto a = replicate(c, o, 6, 0.2, 1);
    const auto b = replicate(c, o, 6, 0.2, 3);
    for (std::size_t i = 0; i < 6; ++i) {
      CHECK(a[i].index == i);
      CHECK(a[i].estimates.mean_Q == b[i].estimates.mean_Q);
      CHECK(a[i].zeta_hat == b[i].zeta_hat);
    }
  }
  SUBCASE("point rates give zero zeta") {
    o.horizon = 1.0;
    o.grid_points = 10;
    for (const auto& r : replicate(make("r = 100"), o, 200, 0.0)) CHECK(r.zeta_hat == 0.0);
  }
  SUBCASE("zeta is normal with the rate variance") {
    o.horizon = 0.2;
    o.grid_points = 4;
    const auto reps = replicate(make("r = 400\nrates = uniform(0.5,1.5)\nseed = 8"), o, 2000, 0.0);
    std::vector<double> z;
    for (const auto& r : reps) z.push_back(r.zeta_hat);
    const double sd = std::sqrt(0.25 / 3.0 * 420.0 / 400.0);
    CHECK(oracle::ks_distance(z, [&](double x) { return oracle::normal_cdf(x / sd); }) < 0.05);
  }
}

TEST_CASE("coupled run") {
  SUBCASE("equal rates give identical departures") {
    const auto c = make("N = 30\nlambda = 28\nrates = point(0.9)");
    const auto path = coupled_run(c, 0.9, draw(c), 1e9, 10000);
    CHECK(path.points.size() == 10000);
    for (const auto& p : path.points) CHECK(p.d_hom == p.d_het);
  }
  SUBCASE("slow homogeneous system departs no faster") {
    const auto c = make("N = 50\nlambda = 48\nrates = uniform(0.8,1.2)\nseed = 4");
    const auto path = coupled_run(c, 0.8, draw(c), 1e9, 10000);
    CHECK(path.ordered());
    CHECK(path.points.back().d_hom < path.points.back().d_het);
  }
  SUBCASE("empty system") {
    const auto c = make("N = 10\nlambda = 0\nrates = uniform(0.8,1.2)");
    const auto path = coupled_run(c, 0.8, draw(c), 100.0, 0, 0);
    CHECK_FALSE(path.points.empty());
    for (const auto& p : path.points) {
      CHECK(p.d_hom == 0);
      CHECK(p.d_het == 0);
    }
  }
  SUBCASE("preconditions") {
    const auto c = make("N = 10\nrates = uniform(0.8,1.2)");
    CHECK_THROWS_AS(coupled_run(c, 1.25, draw(c), 10.0), Error);
    const auto a = make("N = 10\nrates = uniform(0.8,1.2)\nnu = 1");
    CHECK_THROWS_AS(coupled_run(a, 0.8, draw(a), 10.0), Error);
  }
}

TEST_CASE("birth-death fast path agrees with Erlang formulas") {
  core::RngStream s(17);
  const auto chain = birth_death_estimates(100, 90.0, 1.0, 0.0, 2e4, 1e3, s);
  const auto exact = staffing::erlang_c(100, 90.0, 1.0);
  CHECK(std::abs(chain.p_wait - exact.p_wait) < 4.0 * chain.p_wait_se);
  CHECK(std::abs(chain.mean_Q - exact.mean_Q) < 4.0 * chain.mean_Q_se);
  const auto a = birth_death_estimates(50, 55.0, 1.0, 0.5, 2e4, 1e3, s);
  const auto ea = staffing::erlang_a(50, 55.0, 1.0, 0.5);
  CHECK(std::abs(a.mean_Q - ea.mean_Q) < 4.0 * a.mean_Q_se);
}
