import math
import os
from pathlib import Path

import numpy as np
import pytest

import pathfg

SCENE = Path(os.environ.get("PATHFG_SCENE_DIR", Path(__file__).resolve().parents[2] / "scenes")) / "paper_quadrotor.json"

MINIMAL = '{"scene": {"obstacles": []}, "start_position_m": [0.1, 0.1, 0.3], "goal_m": [0.6, 0.4, 0.5]}'


def test_dare_golden_ratio():
    one = np.eye(1)
    P, K = pathfg.solve_dare(one, one, one, one)
    phi = (1 + math.sqrt(5)) / 2
    assert abs(P[0, 0] - phi) < 1e-12
    assert abs(K[0, 0] - (phi - 1)) < 1e-12


def test_qp_halfplane():
    res = pathfg.solve_qp(2 * np.eye(2), np.array([-4.0, -4.0]), np.array([[1.0, 1.0]]), np.array([2.0]))
    assert res["status"] == "optimal"
    np.testing.assert_allclose(res["x"], [1.0, 1.0], atol=1e-6)


def test_zoh_double_integrator():
    A, B = pathfg.discretize_zoh(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]), 0.1)
    np.testing.assert_allclose(A, [[1, 0.1], [0, 1]], atol=1e-14)
    np.testing.assert_allclose(B, [[0.005], [0.1]], atol=1e-14)


def test_config_errors_are_value_errors():
    with pytest.raises(ValueError, match="scene.obstacles"):
        pathfg.parse_config('{"scene": {}, "start_position_m": [0, 0, 0], "goal_m": [1, 1, 1]}')


def test_case_study_closed_loop(tmp_path):
    cfg = pathfg.load_config(str(SCENE))
    assert len(cfg.obstacles) == 6
    waypoints = pathfg.plan(cfg)
    np.testing.assert_allclose(waypoints[-1], cfg.goal)
    res = pathfg.run_closed_loop(cfg)
    assert res.verdict == "converged"
    assert res.violation_count(cfg) == 0
    assert np.all(np.diff(res.s) >= 0) and res.s[-1] == 1.0
    assert res.states.shape == (res.steps + 1, 9)
    pathfg.write_outputs(res, cfg, str(tmp_path))
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == pathfg.trajectory_header()


def test_ungoverned_short_horizon_is_infeasible():
    cfg = pathfg.load_config(str(SCENE))
    runs = pathfg.run_horizon_study(cfg, governed=[], ungoverned=[5])
    assert runs[0]["verdict"] == "infeasible"
    assert runs[0]["first_infeasible_step"] == 0


def test_minimal_potential_field():
    cfg = pathfg.parse_config(MINIMAL)
    cfg.planner = "potential_field"
    res = pathfg.run_closed_loop(cfg)
    assert res.verdict == "converged"
