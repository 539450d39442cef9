import math

import numpy as np
import pytest

import intfb


def test_graph_laplacian_rows_sum_to_zero():
    g = intfb.Graph.from_neighbor_lists([[1, 2, 3, 4], [1, 2, 3], [1, 2, 3, 4], [1, 3, 4, 5], [4, 5]], 1)
    assert g.agent_count == 5
    assert g.is_connected()
    assert np.allclose(g.laplacian().sum(axis=1), 0.0)
    assert g.degrees() == [3, 2, 3, 3, 1]


def test_asymmetric_neighbors_raise():
    with pytest.raises(intfb.IntfbError) as info:
        intfb.Graph.from_neighbor_lists([[2], [1, 3], [1]], 1)
    assert info.value.code == "ASYMMETRIC_NEIGHBORS"


def test_projector_contract():
    a = np.array([[1.0, 0.0], [2.0, 0.0]])
    c = intfb.LinearConstraint.build(a, np.array([1.0, 2.0]))
    assert c.rank == 1
    assert np.allclose(c.projector(), [[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(intfb.IntfbError):
        intfb.LinearConstraint.build(a, np.array([1.0, 3.0]))


def test_paper_example_oracle_and_equilibrium():
    p = intfb.paper_example(1)
    assert (p.agent_count, p.dim) == (5, 20)
    sol = intfb.solve(p)
    assert sol["stationarity"] < 1e-8
    x_star = np.tile(sol["x_star"], 5)
    y_star = intfb.equilibrium_y_star(p, sol["x_star"])
    dx, dy = p.integral_rhs(x_star, y_star)
    assert np.linalg.norm(dx) + np.linalg.norm(dy) < 1e-8


def test_run_is_deterministic_and_converges():
    cfg = intfb.fig1_config(1, "integral")
    cfg["stop"]["w_threshold"] = 1e-6
    a = intfb.run(cfg)
    b = intfb.run(cfg)
    assert a["csv"] == b["csv"]
    assert a["passed"]
    assert a["series"]["W"][-1] <= 1e-6
    assert a["summary"]["run"]["stop_reason"] == "converged"
    header = [line for line in a["csv"].splitlines() if not line.startswith("#")][0]
    assert header == "t,W,consensus_err,constraint_res,V,sum_y_norm,y1_norm"


def test_invalid_config_reports_code():
    with pytest.raises(intfb.IntfbError) as info:
        intfb.run({"problem": {}})
    assert info.value.code == "INVALID_CONFIG"


def test_check_suite_passes():
    results = intfb.check()
    assert results
    assert all(ok for _, ok, _ in results), results


def test_random_instance_rhs_finite():
    p = intfb.random_instance(6, 3, 1, 4)
    sol = intfb.solve(p)
    assert all(math.isfinite(v) for v in sol["x_star"])
