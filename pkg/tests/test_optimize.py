"""Tests of the coordinate-search optimizer and the distance scan."""

import itertools

import pytest

from rpqds.channels import SnsParams, SystemParams
from rpqds.errors import InfeasibleError
from rpqds.optimize import (
    Axis,
    SearchSpace,
    default_space,
    make_objective,
    optimize,
    scan_distance,
)
from rpqds.security import asymptotic_pipeline


def test_optimize_1d_concave():
    space = SearchSpace(axes=(Axis("x", 0.0, 1.0),))
    result = optimize(lambda p: -(p["x"] - 0.3) ** 2, space, budget=400,
                      seed=1, n_starts=2)
    assert result.best_params["x"] == pytest.approx(0.3, abs=1e-6)
    assert result.feasible


def test_optimize_2d_separable():
    space = SearchSpace(axes=(Axis("x", 0.0, 1.0), Axis("y", 0.0, 1.0)))
    result = optimize(
        lambda p: -(p["x"] - 0.2) ** 2 - (p["y"] - 0.7) ** 2,
        space, budget=2000, seed=3, n_starts=2)
    assert result.best_params["x"] == pytest.approx(0.2, abs=1e-6)
    assert result.best_params["y"] == pytest.approx(0.7, abs=1e-6)


def test_optimize_log_axis():
    space = SearchSpace(axes=(Axis("x", 1e-6, 1.0, log=True),))
    result = optimize(lambda p: -(p["x"] - 1e-3) ** 2, space, budget=400,
                      seed=0)
    assert result.best_params["x"] == pytest.approx(1e-3, rel=1e-3)


def test_optimize_deterministic():
    space = SearchSpace(axes=(Axis("x", 0.0, 1.0), Axis("y", 0.0, 1.0)))

    def run():
        return optimize(
            lambda p: -(p["x"] - 0.41) ** 2 - 0.3 * (p["y"] - 0.09) ** 2,
            space, budget=700, seed=11, n_starts=4)

    a, b = run(), run()
    assert a.best_params == b.best_params
    assert a.best_rate == b.best_rate
    assert a.evaluations == b.evaluations


def test_optimize_all_infeasible_signals():
    space = SearchSpace(axes=(Axis("x", 0.0, 1.0),))

    def objective(params):
        raise InfeasibleError("nope")

    with pytest.raises(InfeasibleError) as err:
        optimize(objective, space, budget=50, seed=0)
    assert err.value.constraint == "all-infeasible"


def test_optimize_beats_center_point():
    sys_p = SystemParams(e_d=0.05, distance_km=100.0)
    objective = make_objective(sys_p, "sns-asym", use_rp=True)
    space = default_space("sns-asym")
    result = optimize(objective, space, budget=600, seed=0)
    center = objective(space.params([0.5] * len(space.axes)))
    assert result.best_rate >= center


def test_optimize_dominates_validation_grid():
    # brute-force 20^3 grid over the same box must not beat the search
    sys_p = SystemParams(e_d=0.05, distance_km=100.0)
    objective = make_objective(sys_p, "sns-asym", use_rp=True)
    space = default_space("sns-asym")
    result = optimize(objective, space, budget=900, seed=0)
    steps = [i / 19.0 for i in range(20)]
    best_grid = -1.0
    for u in itertools.product(steps, steps, steps):
        try:
            best_grid = max(best_grid, objective(space.params(u)))
        except Exception:
            continue
    assert result.best_rate >= best_grid


def test_optimize_argmax_invariant_under_pulse_scaling():
    # the asymptotic rate is per-pulse: scaling the pulse count must not
    # move the optimizer's choice at all
    sys_p = SystemParams(e_d=0.05, distance_km=120.0)
    space = default_space("sns-asym")

    def run(n):
        objective = make_objective(sys_p, "sns-asym", use_rp=True,
                                   n_pulses=n)
        return optimize(objective, space, budget=500, seed=5)

    a = run(1e12)
    b = run(1e13)
    assert a.best_params == b.best_params


def test_scan_empty_distances():
    sys_p = SystemParams(e_d=0.05)
    assert scan_distance(sys_p, "sns-asym", []) == []


def test_scan_records_infeasible_points_and_continues():
    sys_p = SystemParams(e_d=0.12)
    points = scan_distance(sys_p, "scf-asym", [800.0, 50.0], budget=120,
                           n_starts=2)
    assert len(points) == 2
    assert not points[0].feasible
    assert points[0].reason
    assert points[1].feasible


def test_scan_improvement_at_200km():
    sys_p = SystemParams(e_d=0.10)
    points = scan_distance(sys_p, "sns-asym", [200.0], budget=700,
                           include_baseline=True)
    point = points[0]
    assert point.feasible
    assert 0.70 <= point.gamma <= 1.02


def test_scan_warm_start_agrees_with_cold():
    sys_p = SystemParams(e_d=0.05)
    distances = [80.0, 100.0, 120.0, 140.0, 160.0]
    cold = scan_distance(sys_p, "sns-asym", distances, budget=500, seed=2)
    warm = scan_distance(sys_p, "sns-asym", distances, budget=500, seed=2,
                         warm_start=True)
    for c, w in zip(cold, warm):
        assert w.result.rate >= c.result.rate * 0.99


def test_scan_respects_thread_env(monkeypatch):
    sys_p = SystemParams(e_d=0.05)
    distances = [90.0, 130.0]
    serial = scan_distance(sys_p, "sns-asym", distances, budget=300, seed=7)
    monkeypatch.setenv("RPQDS_THREADS", "2")
    threaded = scan_distance(sys_p, "sns-asym", distances, budget=300,
                             seed=7)
    for a, b in zip(serial, threaded):
        assert a.result.rate == b.result.rate
        assert a.result.params_used == b.result.params_used


def test_asymptotic_pipeline_matches_scan_result():
    sys_p = SystemParams(e_d=0.05, distance_km=100.0)
    points = scan_distance(sys_p, "sns-asym", [100.0], budget=400, seed=0)
    p = points[0].result.params_used
    direct = asymptotic_pipeline(
        sys_p, SnsParams(mu=p["mu"], q=p["q"], p_z=p["p_z"],
                         n_pulses=1e12))
    assert direct.rate == points[0].result.rate