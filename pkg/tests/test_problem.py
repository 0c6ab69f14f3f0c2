from __future__ import annotations

import numpy as np
import pytest

from symoc import (
    FULL_SET,
    INF,
    DiscreteProblem,
    InvalidTrajectoryError,
    ProblemFormatError,
    SignalPrefix,
    cost_functional,
    dp_operator,
    policy_performance,
    predecessors,
)

from conftest import DASHED, SOLID, SEVEN_STATE_VALUES, make_seven_state


class TestCostFunctional:
    def test_stop_immediately_pays_terminal_only(self, seven_state):
        j = cost_functional(seven_state, SignalPrefix(states=(6,), inputs=()))
        assert j == 7.0

    def test_one_step_solid(self, seven_state):
        j = cost_functional(seven_state, SignalPrefix(states=(6, 3), inputs=(SOLID,)))
        assert j == 5.0  # terminal 4 plus running 1

    def test_two_steps_solid(self, seven_state):
        j = cost_functional(
            seven_state, SignalPrefix(states=(6, 3, 2), inputs=(SOLID, SOLID))
        )
        assert j == 2.0  # 3 + 1 - 2

    def test_alternative_branch(self, seven_state):
        assert (
            cost_functional(seven_state, SignalPrefix(states=(6, 4), inputs=(SOLID,)))
            == 6.0
        )
        j = cost_functional(
            seven_state, SignalPrefix(states=(6, 4, 0), inputs=(SOLID, SOLID))
        )
        assert j == 1.0

    def test_infinite_summand_absorbs(self):
        p = DiscreteProblem(
            2, 1, {(0, 0): [1], (1, 0): [1]}, [0.0, 3.0], {(0, 0): [INF], (1, 0): [0.0]}
        )
        j = cost_functional(p, SignalPrefix(states=(0, 1), inputs=(0,)))
        assert j == INF

    def test_invalid_transition_rejected(self, seven_state):
        with pytest.raises(InvalidTrajectoryError):
            cost_functional(seven_state, SignalPrefix(states=(6, 0), inputs=(SOLID,)))

    def test_length_mismatch_rejected(self):
        with pytest.raises(InvalidTrajectoryError):
            SignalPrefix(states=(1, 2), inputs=())


class TestDpOperator:
    def test_single_application_on_terminal(self, seven_state):
        out = dp_operator(seven_state, seven_state.terminal)
        # state 2 (0-indexed 1): min(2, 1 + 2, -4 + 3) = -1
        assert out[1] == -1.0

    def test_all_inf_weights_reduce_to_terminal(self, seven_state):
        w = np.full(7, INF)
        assert np.array_equal(dp_operator(seven_state, w), seven_state.terminal)

    def test_value_function_is_fixed_point(self, seven_state):
        assert np.array_equal(
            dp_operator(seven_state, SEVEN_STATE_VALUES), SEVEN_STATE_VALUES
        )


class TestPredecessors:
    def test_dashed_into_state_six(self, seven_state):
        assert predecessors(seven_state, 5, DASHED) == {6}

    def test_solid_into_state_one(self, seven_state):
        assert predecessors(seven_state, 0, SOLID) == {0, 4}

    def test_identity_dynamics(self):
        p = DiscreteProblem(
            3,
            1,
            {(x, 0): [x] for x in range(3)},
            [0.0] * 3,
            {(x, 0): [0.0] for x in range(3)},
        )
        for x in range(3):
            assert predecessors(p, x, 0) == {x}


class TestPolicyPerformance:
    def test_all_solid_controller(self, seven_state):
        mu = np.zeros(7, dtype=np.int64)
        perf = policy_performance(seven_state, mu)
        assert perf[6] == 2.0

    def test_full_set_everywhere_bounded_by_terminal(self, seven_state):
        mu = np.full(7, FULL_SET, dtype=np.int64)
        perf = policy_performance(seven_state, mu)
        assert np.all(perf <= seven_state.terminal)


class TestValidation:
    def test_empty_head_set_rejected(self):
        with pytest.raises(ProblemFormatError):
            DiscreteProblem(2, 1, {(0, 0): [], (1, 0): [0]}, [0, 0], {(0, 0): [0], (1, 0): [0]})

    def test_missing_arc_rejected(self):
        with pytest.raises(ProblemFormatError):
            DiscreteProblem(2, 1, {(0, 0): [1]}, [0, 0], {(0, 0): [0]})

    def test_negative_infinity_rejected(self):
        with pytest.raises(ProblemFormatError):
            DiscreteProblem(
                1, 1, {(0, 0): [0]}, [-INF], {(0, 0): [0.0]}
            )
        with pytest.raises(ProblemFormatError):
            DiscreteProblem(
                1, 1, {(0, 0): [0]}, [0.0], {(0, 0): [-INF]}
            )

    def test_out_of_range_head_rejected(self):
        with pytest.raises(ProblemFormatError):
            DiscreteProblem(2, 1, {(0, 0): [2], (1, 0): [0]}, [0, 0], {(0, 0): [0], (1, 0): [0]})
