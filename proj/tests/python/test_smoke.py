import json
import math

import numpy as np
import pytest

import hetq


def test_erlang_c_single_server():
    res = hetq.erlang_c(1, 0.5, 1.0)
    assert res.p_wait == pytest.approx(0.5)
    assert res.mean_Q == pytest.approx(0.5)


def test_unstable_raises_with_code():
    with pytest.raises(hetq.HetqError) as info:
        hetq.erlang_c(2, 3.0, 1.0)
    assert info.value.code == "UNSTABLE"


def test_rate_law_and_gamma():
    law = hetq.RateDistribution.parse("uniform(0.5,1.5)")
    assert law.mean == pytest.approx(1.0)
    assert law.variance == pytest.approx(1.0 / 12.0)
    assert hetq.idleness_gamma(law, "LISF") == pytest.approx(1.0 + 1.0 / 12.0)
    assert hetq.idleness_gamma(law, "FSF") == pytest.approx(0.5)


def test_stationary_density_integrates_to_one():
    params = hetq.DiffusionParams(sigma=math.sqrt(2.0), beta=-1.0, gamma=1.0)
    dens = hetq.stationary(params)
    x = np.linspace(-30.0, 30.0, 60001)
    pdf = dens.pdf(x)
    assert np.trapezoid(pdf, x) == pytest.approx(1.0, abs=1e-6)
    assert dens.varrho == pytest.approx(hetq.prob_wait_no_aband(-1.0, math.sqrt(2.0), 1.0))
    assert dens.cdf(np.array([40.0]))[0] == pytest.approx(1.0)


def test_ql_eps_orders_policies():
    lisf = hetq.ql_eps(0.3, 1.0, 4.0, 2.0, 2.0, "LISF")
    fsf = hetq.ql_eps(0.3, 1.0, 4.0, 2.0, 2.0, "FSF")
    assert 0.0 < fsf < lisf
    assert hetq.ql_eps(0.4, 1.0, 4.0, 2.0, 2.0, "LISF") > lisf


def test_simulate_and_estimates():
    cfg = hetq.config(r=20, theta=1, rates="point(1)", seed=3)
    path = hetq.simulate(cfg, horizon=500.0, grid_points=501)
    assert path.n == cfg.servers
    assert len(path.t) == 501
    assert np.all(path.Q >= 0)
    assert np.all(path.X == path.Q + path.Z.sum(axis=0))
    est = hetq.steady_estimates(path, warmup=0.2)
    exact = hetq.erlang_c(path.n, cfg.lambda_r, 1.0)
    assert abs(est.p_wait - exact.p_wait) < 6 * est.p_wait_se + 0.02


def test_unknown_key_is_config_error():
    with pytest.raises(hetq.HetqError) as info:
        hetq.config(r=10, bogus=1)
    assert info.value.code == "CONFIG_ERROR"
    assert "bogus" in str(info.value)


def test_ssc_and_static_plan():
    assert hetq.ssc_g([1.0], [2.0], 3.0, [1.5]) == 0.0
    plan = hetq.static_planning_inverted_v([0.5, 0.5], [1.0, 2.0], 1.5)
    assert plan.rho_star == pytest.approx(1.0)
    assert plan.heavy_traffic


def test_optimize_staffing_interior():
    cfg = hetq.config(r=100, nu=1, rates="uniform(0.8,1.2)")
    res = hetq.optimize_staffing(cfg, model="aband", c_s=1.0, d=5.0)
    assert 0.05 < res.x_star < 4.0
    costs = [c for _, c in res.cost_curve]
    assert res.cost_at_optimum <= min(costs) + 1e-9


def test_run_command_writes_manifest(tmp_path):
    code, _, err = hetq.run_command("ql-sweep", out_dir=str(tmp_path), overrides=["eps_hi=0.2"])
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "ql-sweep"
    assert (tmp_path / "ql_sweep.csv").exists()
    code, _, _ = hetq.run_command("simulate", out_dir=str(tmp_path), overrides=["nope=1"])
    assert code == 2
