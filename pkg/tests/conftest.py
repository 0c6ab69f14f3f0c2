from __future__ import annotations

import numpy as np
import pytest

from symoc import INF, DiscreteProblem

# Seven-state, two-input golden example.  States are 0-indexed here; the
# classic drawing numbers them 1..7.  Input 0 is the solid-edge family,
# input 1 the dashed one.  Terminal cost of state i is i + 1.
#
# Expected value function: (1, -1, 3, 0, -1, -1, 0)
# Expected controller:     states 2,4,5,7 -> {dashed}; 6 -> {solid};
#                          1 and 3 -> full set (hand over).
SEVEN_STATE_TRANSITIONS = {
    (0, 0): [0],
    (0, 1): [1],
    (1, 0): [1],
    (1, 1): [2],
    (2, 0): [2],
    (2, 1): [1],
    (3, 0): [2],
    (3, 1): [0, 1],
    (4, 0): [0],
    (4, 1): [2],
    (5, 0): [4],
    (5, 1): [2],
    (6, 0): [3, 4],
    (6, 1): [5],
}
SEVEN_STATE_COSTS = {
    (0, 0): [1.0],
    (0, 1): [2.0],
    (1, 0): [1.0],
    (1, 1): [-4.0],
    (2, 0): [1.0],
    (2, 1): [5.0],
    (3, 0): [-2.0],
    (3, 1): [-1.0, -1.0],
    (4, 0): [-1.0],
    (4, 1): [-4.0],
    (5, 0): [0.0],
    (5, 1): [-1.0],
    (6, 0): [1.0, 1.0],
    (6, 1): [1.0],
}
SEVEN_STATE_TERMINAL = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]

SEVEN_STATE_VALUES = np.array([1.0, -1.0, 3.0, 0.0, -1.0, -1.0, 0.0])

SOLID, DASHED = 0, 1


def make_seven_state() -> DiscreteProblem:
    return DiscreteProblem(
        7, 2, SEVEN_STATE_TRANSITIONS, SEVEN_STATE_TERMINAL, SEVEN_STATE_COSTS
    )


@pytest.fixture
def seven_state() -> DiscreteProblem:
    return make_seven_state()


def values_close(a, b, tol=0.0) -> bool:
    """Compare value maps: identical +inf pattern, finite parts within tol."""
    a, b = np.asarray(a), np.asarray(b)
    if not np.array_equal(np.isinf(a), np.isinf(b)):
        return False
    finite = ~np.isinf(a)
    if tol == 0.0:
        return np.array_equal(a[finite], b[finite])
    return bool(np.max(np.abs(a[finite] - b[finite]), initial=0.0) <= tol)


def make_negative_cycle() -> DiscreteProblem:
    # state 0 loops on itself with reward -1 and has finite terminal cost;
    # its value descends forever.
    return DiscreteProblem(
        2,
        1,
        {(0, 0): [0], (1, 0): [0]},
        [0.0, INF],
        {(0, 0): [-1.0], (1, 0): [0.0]},
    )
