"""Simulate, optimize and certify controlled sweeping processes."""

import json

from . import _sweepkit
from ._sweepkit import SweepError, analytic_cost_ex1, analytic_cost_ex3, analytic_switch_ex3, project

__all__ = [
    "SweepError",
    "analytic_cost_ex1",
    "analytic_cost_ex3",
    "analytic_switch_ex3",
    "converge",
    "example_names",
    "example_problem",
    "project",
    "run_example",
    "simulate",
]


def example_names():
    return list(_sweepkit.example_names())


def example_problem(name):
    return json.loads(_sweepkit.example_problem(name))


def _target(problem):
    # example name, or a problem dict
    return problem if isinstance(problem, str) else json.dumps(problem)


def simulate(problem, params, nu=2000):
    """Trajectory dict (t, x, eta, slack, cost, hits, switch_time) for family parameters."""
    return json.loads(_sweepkit.simulate(_target(problem), nu, list(params)))


def run_example(name, nu=2000, **opts):
    return json.loads(_sweepkit.run_example(name, nu, **opts))


def converge(name, nus=(250, 500, 1000, 2000)):
    return json.loads(_sweepkit.converge(name, list(nus)))
