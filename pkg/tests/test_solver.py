from __future__ import annotations

import numpy as np
import pytest

from symoc import (
    FULL_SET,
    INF,
    DiscreteProblem,
    bellman_ford_yen,
    policy_performance,
    value_iteration_oracle,
)

from conftest import DASHED, SOLID, SEVEN_STATE_VALUES, make_negative_cycle


def test_golden_values_and_controller(seven_state):
    report = bellman_ford_yen(seven_state)
    assert report.converged
    assert np.array_equal(report.values, SEVEN_STATE_VALUES)
    assert report.choices(5, 2) == {SOLID}
    for s in (1, 3, 4, 6):
        assert report.choices(s, 2) == {DASHED}
    assert report.choices(0, 2) == {0, 1}
    assert report.choices(2, 2) == {0, 1}


def test_golden_matches_oracle(seven_state):
    report = bellman_ford_yen(seven_state)
    oracle = value_iteration_oracle(seven_state)
    assert oracle.stabilized
    assert np.array_equal(report.values, oracle.values)


def test_controller_realizes_values(seven_state):
    report = bellman_ford_yen(seven_state)
    perf = policy_performance(seven_state, report.controller)
    assert np.array_equal(perf, report.values)


def test_negative_cycle_detected():
    p = make_negative_cycle()
    report = bellman_ford_yen(p)
    assert not report.converged
    assert report.sweeps == 2  # guard fires at n_states


def test_all_inf_terminal_converges_immediately():
    p = DiscreteProblem(
        3,
        1,
        {(x, 0): [(x + 1) % 3] for x in range(3)},
        [INF, INF, INF],
        {(x, 0): [1.0] for x in range(3)},
    )
    report = bellman_ford_yen(p)
    assert report.converged
    assert report.sweeps == 0
    assert report.relaxations == 0
    assert np.all(np.isinf(report.values))
    assert np.all(report.controller == FULL_SET)


def test_superset_pred_fn_gives_same_values(seven_state):
    exact = bellman_ford_yen(seven_state)
    everything = lambda x, u: range(seven_state.n_states)
    loose = bellman_ford_yen(seven_state, pred_fn=everything)
    assert loose.converged
    assert np.array_equal(loose.values, exact.values)


def test_sweep_and_relaxation_bounds(seven_state):
    report = bellman_ford_yen(seven_state)
    assert report.sweeps <= seven_state.n_states
    assert report.relaxations <= seven_state.n_states * seven_state.total_heads
