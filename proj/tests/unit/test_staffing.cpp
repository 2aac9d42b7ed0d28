#include <cmath>

#include "doctest.h"
#include "hetq/diffusion/diffusion.hpp"
#include "hetq/error.hpp"
#include "hetq/staffing/staffing.hpp"
#include "support/oracles.hpp"

using namespace hetq;
using namespace hetq::staffing;

namespace {

struct Chain {
  double p_wait, mean_Q;
};

Chain mmn_chain(int n, double lambda, double mu, double nu, int states) {
  const auto pi = oracle::birth_death([&](int) { return lambda; },
                                      [&](int j) { return std::min(j, n) * mu + std::max(j - n, 0) * nu; }, states);
  Chain c{0.0, 0.0};
  for (int j = n; j < states; ++j) {
    c.p_wait += pi[j];
    c.mean_Q += (j - n) * pi[j];
  }
  return c;
}

core::SystemConfig system(double r, const char* rates) {
  core::KeyValues kv;
  kv.set("r", std::to_string(r));
  kv.set("rates", rates);
  return core::SystemConfig::from_keys(kv);
}

}  // namespace

TEST_CASE("erlang_c small cases") {
  CHECK(erlang_c(1, 0.3, 1.0).p_wait == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(erlang_c(2, 1.0, 1.0).p_wait == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(erlang_c(2, 2.0, 1.0), Error);
  try {
    erlang_c(3, 5.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Unstable);
  }
  const auto big = erlang_c(100000, 99000.0, 1.0);
  CHECK(std::isfinite(big.p_wait));
  CHECK_UNARY(big.p_wait > 0.0 && big.p_wait < 1.0);
}

TEST_CASE("erlang_c agrees with the birth-death solve") {
  const auto e = erlang_c(100, 90.0, 1.0);
  const auto c = mmn_chain(100, 90.0, 1.0, 0.0, 3000);
  CHECK(std::abs(e.p_wait - c.p_wait) < 1e-10);
  CHECK(std::abs(e.mean_Q - c.mean_Q) < 1e-8);
  for (int n : {1, 5, 37, 120, 200}) {
    const double lambda = 0.85 * n;
    const auto a = erlang_c(n, lambda, 1.0);
    const auto b = mmn_chain(n, lambda, 1.0, 0.0, n + 2500);
    CHECK(std::abs(a.p_wait - b.p_wait) < 1e-8);
    CHECK(std::abs(a.mean_Q - b.mean_Q) < 1e-8);
    CHECK(a.mean_W == doctest::Approx(a.mean_Q / lambda));
  }
}

TEST_CASE("erlang_a") {
  SUBCASE("nu = mu gives a Poisson law") {
    const double a = 7.5;
    const auto e = erlang_a(5, a, 1.0, 1.0);
    double tail = 0.0, queue = 0.0, term = std::exp(-a);
    for (int j = 0; j < 200; ++j) {
      if (j >= 5) {
        tail += term;
        queue += (j - 5) * term;
      }
      term *= a / (j + 1);
    }
    CHECK(e.p_wait == doctest::Approx(tail).epsilon(1e-12));
    CHECK(e.mean_Q == doctest::Approx(queue).epsilon(1e-12));
  }
  SUBCASE("light load") {
    const auto e = erlang_a(10, 1e-6, 1.0, 1.0);
    CHECK(e.p_wait < 1e-40);
    CHECK(e.abandon_prob < 1e-40);
  }
  SUBCASE("birth-death oracle") {
    const auto e = erlang_a(50, 55.0, 1.0, 0.5);
    const auto c = mmn_chain(50, 55.0, 1.0, 0.5, 10000);
    CHECK(std::abs(e.mean_Q - c.mean_Q) < 1e-8);
    CHECK(std::abs(e.p_wait - c.p_wait) < 1e-8);
    for (int n : {1, 20, 90, 200})
      for (double rho : {0.5, 1.0, 1.4}) {
        const auto a = erlang_a(n, rho * n, 1.0, 0.3);
        const auto b = mmn_chain(n, rho * n, 1.0, 0.3, n + 4000);
        CHECK(std::abs(a.mean_Q - b.mean_Q) < 1e-8);
        CHECK(std::abs(a.p_wait - b.p_wait) < 1e-8);
      }
  }
}

TEST_CASE("waiting cost G") {
  CHECK(waiting_cost_G(3.0, 1.0, DelayCost::linear(0.0)) == 0.0);
  CHECK(waiting_cost_G(5.0, 3.0, DelayCost::linear(3.0)) == doctest::Approx(1.5));
  CHECK(waiting_cost_G(2.0, 1.0, DelayCost::power(1.0, 2.0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(waiting_cost_G(2.0, 1.0, DelayCost::from([](double t) { return t * t; })) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(waiting_cost_G(1.5, 1.0, DelayCost::from([](double t) { return 1.0 - std::exp(-t); })) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(waiting_cost_G(1.0, 1.0, DelayCost::linear(1.0)), Error);
}

TEST_CASE("cost without abandonment") {
  const auto cfg = system(100.0, "uniform(0.5,1.5)");
  const auto law = cfg.rates;
  CostSpec spec;
  spec.c_s = 2.0;
  spec.waiting = DelayCost::linear(0.0);
  const auto c0 = cost_no_aband(1.3, cfg, law, spec);
  CHECK(c0.total == doctest::Approx(2.0 * 1.3 * 10.0));

  spec.waiting = DelayCost::linear(1.0);
  spec.nodes = 64;
  const double a = cost_no_aband(1.0, cfg, law, spec).total;
  spec.nodes = 128;
  const double b = cost_no_aband(1.0, cfg, law, spec).total;
  CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
  CHECK(cost_no_aband(1.0, cfg, law, spec).total == b);

  spec.C_un = 7.0;
  const auto withpen = cost_no_aband(0.3, cfg, law, spec);
  CHECK(withpen.unstable_penalty == doctest::Approx(7.0 * (1.0 - withpen.p_stable)));
  CHECK_THROWS_AS(cost_no_aband(0.0, cfg, law, spec), Error);
}

TEST_CASE("deterministic-rate cost curve is unimodal") {
  const auto cfg = system(100.0, "point(1)");
  CostSpec spec;
  spec.c_s = 1.0;
  spec.waiting = DelayCost::linear(5.0);
  std::vector<double> curve;
  for (double x = 0.1; x <= 5.0 + 1e-12; x += 0.01) curve.push_back(cost_no_aband(x, cfg, cfg.rates, spec).total);
  std::size_t turns = 0;
  for (std::size_t i = 1; i + 1 < curve.size(); ++i)
    if ((curve[i] - curve[i - 1]) * (curve[i + 1] - curve[i]) < 0.0) ++turns;
  CHECK(turns == 1);
}

TEST_CASE("cost with abandonment") {
  const auto cfg = system(400.0, "uniform(0.8,1.2)");
  CostSpec spec;
  spec.nu = 1.0;
  spec.d = 0.0;
  CHECK(cost_aband(1.1, cfg, cfg.rates, spec).total == doctest::Approx(1.1 * 20.0));
  spec.d = 5.0;
  const auto one = cost_aband(1.1, cfg, cfg.rates, spec);
  spec.d = 10.0;
  const auto two = cost_aband(1.1, cfg, cfg.rates, spec);
  CHECK(two.variable == doctest::Approx(2.0 * one.variable).epsilon(1e-15));

  const auto pt = system(400.0, "point(1)");
  spec.d = 5.0;
  const double direct = 1.1 * 20.0 + 5.0 * 1.0 * 20.0 * diffusion::expected_positive_part({std::sqrt(2.0), -1.1, 1.0, 1.0});
  CHECK(cost_aband(1.1, pt, pt.rates, spec).total == doctest::Approx(direct).epsilon(1e-14));
  spec.nu = 0.0;
  CHECK_THROWS_AS(cost_aband(1.0, cfg, cfg.rates, spec), Error);
}

TEST_CASE("optimizer") {
  SUBCASE("convex quadratic") {
    const auto r = optimize_staffing([](double x) { return (x - 2.0) * (x - 2.0); }, 0.1, 5.0, 1e-6);
    CHECK(std::abs(r.x_star - 2.0) < 1e-6);
    CHECK(r.unimodal);
    CHECK(r.cost_curve.size() == 64);
    for (const auto& [x, c] : r.cost_curve) CHECK(r.cost_at_optimum <= c);
  }
  SUBCASE("expensive staff hugs the lower end") {
    const auto cfg = system(100.0, "uniform(0.8,1.2)");
    CostSpec spec;
    spec.c_s = 1e4;
    spec.nu = 1.0;
    spec.d = 1.0;
    const auto r = optimize_staffing([&](double x) { return cost_aband(x, cfg, cfg.rates, spec).total; }, 0.05, 6.0,
                                     1e-6);
    CHECK(r.x_star < 0.05 + 1e-5);
  }
  SUBCASE("two basins are flagged and the better one wins") {
    auto f = [](double x) { return std::min((x - 1.0) * (x - 1.0) + 0.2, (x - 4.0) * (x - 4.0)); };
    const auto r = optimize_staffing(f, 0.1, 5.0, 1e-7);
    CHECK_FALSE(r.unimodal);
    CHECK(std::abs(r.x_star - 4.0) < 1e-6);
    for (const auto& [x, c] : r.cost_curve) CHECK(r.cost_at_optimum <= c);
  }
  SUBCASE("evaluation failures") {
    CHECK_THROWS_AS(optimize_staffing([](double) -> double { throw Error(ErrorCode::Domain, "x"); }, 0.1, 1.0, 1e-3),
                    Error);
    CHECK_THROWS_AS(optimize_staffing([](double x) { return x; }, 1.0, 0.5, 1e-3), Error);
    const auto r = optimize_staffing([](double x) { return x < 0.5 ? NAN : x; }, 0.1, 1.0, 1e-6);
    CHECK(r.x_star == doctest::Approx(0.5).epsilon(0.02));
  }
}
