"""Shared corpus fixture.

The corpus is the standing battery of decreasing data families used by the
structural tests: five families, s in {2, 3, 5}, delta in {0.2, 0.1},
epsilon = delta**3, n = 2001 on [-12, 12], integrated to t = 2.
"""

import time

import pytest

from degenwave.core import model_params
from degenwave.families import build_family
from degenwave.grid import GridSpec
from degenwave.initdata import check_admissible, mollify_riemann, threshold
from degenwave.solver import SolveConfig, run

CORPUS_FAMILIES = {
    "const": {"level": 0.8},
    "vel_bump": {"level": 0.8, "amplitude": 0.5, "width": 4.0},
    "v0_ramp": {"high": 1.0, "low": 0.4, "width": 3.0},
    "both_ramp": {"high": 1.0, "low": 0.7, "amplitude": 0.2},
    "vacuum_ramp": {"high": 1.0, "width": 3.0},
}
CORPUS_S = (2.0, 3.0, 5.0)
CORPUS_DELTAS = (0.2, 0.1)
CORPUS_GRID = GridSpec(-12.0, 12.0, 2001)
CORPUS_T_END = 2.0


class CorpusRun:
    """One corpus member: data, mollified state, trajectory, wall time."""

    def __init__(self, family, params, s, delta):
        self.family = family
        self.params = dict(params)
        self.s = s
        self.delta = delta
        self.p = model_params(s)
        self.data = build_family(family, CORPUS_GRID, self.p, dict(params))
        self.admissibility = check_admissible(self.data, self.p)
        self.threshold = threshold(self.data, self.p)
        self.mdata = mollify_riemann(self.data, self.p, delta)
        self.solve = SolveConfig(delta=delta, t_end=CORPUS_T_END)
        start = time.perf_counter()
        self.traj = run(self.mdata, self.solve, self.p)
        self.wall = time.perf_counter() - start
        self.label = f"{family}/s={s:g}/delta={delta:g}"


@pytest.fixture(scope="session")
def corpus():
    return [
        CorpusRun(name, params, s, delta)
        for name, params in CORPUS_FAMILIES.items()
        for s in CORPUS_S
        for delta in CORPUS_DELTAS
    ]
