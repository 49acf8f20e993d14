import math

import numpy as np
import pytest

import sweepkit


def test_examples_are_registered():
    assert sweepkit.example_names() == ["ex1", "ex2", "ex3"]
    p = sweepkit.example_problem("ex3")
    assert len(p["facets"]) == 2
    assert p["family"]["kind"] == "two_phase_rate_b"


def test_projection_onto_halfspace():
    r5 = math.sqrt(5.0)
    x, lam = sweepkit.project(np.array([[-1 / r5, -2 / r5]]), np.array([-2 / r5]), np.zeros(2))
    assert np.allclose(x, [0.4, 0.8])
    assert lam[0] == pytest.approx(2 / r5)


def test_edge_shift_simulation_matches_closed_form():
    tr = sweepkit.simulate("ex3", [0.0, 0.0], nu=400)
    assert np.allclose(tr["x"][-1], [-0.5, 1.5], atol=1e-6)
    assert tr["cost"] == pytest.approx(sweepkit.analytic_cost_ex3(0.0, 0.0), abs=1e-6)
    assert tr["switch_time"] == pytest.approx(0.5, abs=2 / 400)
    assert len(tr["t"]) == 401 and len(tr["eta"]) == 400


def test_problem_dict_round_trip():
    p = sweepkit.example_problem("ex1")
    tr = sweepkit.simulate(p, [-5 / 6, -1 / 3], nu=200)
    assert tr["cost"] == pytest.approx(43 / 24, abs=1e-6)


def test_example_report():
    r = sweepkit.run_example("ex1", nu=200, levels=2, ppa=5, max_iter=100)
    assert abs(r["cost"] - 43 / 24) <= 1e-3
    assert r["certificate"]["passed"]


def test_converge_rows():
    rows = sweepkit.converge("ex3", [50, 100])
    assert [r["nu"] for r in rows] == [50, 100]
    assert rows[0]["order"] is None


def test_errors_surface():
    with pytest.raises(sweepkit.SweepError):
        sweepkit.simulate("ex1", [0.0], nu=10)
