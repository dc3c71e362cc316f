"""Long benchmark runs shared between the solver and acceptance suites."""

import math

import numpy as np
import pytest

from penalty_splitting.operators import Box
from penalty_splitting.problems import (
    StoppingPolicy,
    make_quadratic_over_nullspace,
    make_saddle_composite,
    make_strongly_monotone,
)
from penalty_splitting.schedules import make_schedule
from penalty_splitting.solvers import run

N_ITER = 100_000


@pytest.fixture(scope="session")
def quadratic_problem():
    return make_quadratic_over_nullspace([2.0, 3.0], [[1.0, 0.0]])


@pytest.fixture(scope="session")
def quadratic_run(quadratic_problem):
    return run(quadratic_problem, make_schedule(1, 0.9, 1, 0.5), "fb", StoppingPolicy(max_iter=N_ITER))


@pytest.fixture(scope="session")
def strong_problem():
    return make_strongly_monotone(1.0, [-3.0], Box(0.0, math.inf, 1))


@pytest.fixture(scope="session")
def strong_runs(strong_problem):
    sched = make_schedule(0.4, 0.75, 2.0, 0.75)
    stop = StoppingPolicy(max_iter=N_ITER)
    return {kind: run(strong_problem, sched, kind, stop) for kind in ("fb", "fbf")}


@pytest.fixture(scope="session")
def saddle_problem():
    return make_saddle_composite(2 * np.eye(2), [2.0, 3.0], 2 * np.eye(2), np.eye(2), [[1.0, 0.0]])


@pytest.fixture(scope="session")
def saddle_schedule():
    return make_schedule(0.2, 0.55, 2.25, 0.55)


@pytest.fixture(scope="session")
def saddle_run(saddle_problem, saddle_schedule):
    return run(saddle_problem, saddle_schedule, "fbf_composite", StoppingPolicy(max_iter=N_ITER))
