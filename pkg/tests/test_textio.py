from __future__ import annotations

import numpy as np
import pytest

from symoc import FULL_SET, INF, bellman_ford_yen, random_problem
from symoc.textio import (
    ParseError,
    dump_controller,
    dump_problem,
    dump_solution_binary,
    dump_values,
    load_controller,
    load_problem,
    load_solution_binary,
    load_values,
    parse_problem,
)

from conftest import make_seven_state


def test_problem_round_trip(tmp_path):
    p = make_seven_state()
    path = tmp_path / "seven.txt"
    dump_problem(p, path)
    q = load_problem(path)
    assert q.n_states == p.n_states and q.n_inputs == p.n_inputs
    assert np.array_equal(q.terminal, p.terminal)
    for x in range(p.n_states):
        for u in range(p.n_inputs):
            assert np.array_equal(q.successors(x, u), p.successors(x, u))
            assert np.array_equal(q.arc_costs(x, u), p.arc_costs(x, u))


def test_random_round_trip_preserves_solution(tmp_path):
    rng = np.random.default_rng(7)
    p = random_problem(rng)
    path = tmp_path / "rand.txt"
    dump_problem(p, path)
    q = load_problem(path)
    a, b = bellman_ford_yen(p), bellman_ford_yen(q)
    assert a.converged == b.converged
    assert np.array_equal(a.values, b.values)


def test_inf_literal_and_default_terminal():
    p = parse_problem(
        """
        states 2 inputs 1
        0 0 1 : inf
        1 0 1 : 0.5
        terminal 1 inf
        """
    )
    assert p.terminal[0] == INF and p.terminal[1] == INF
    assert p.arc_costs(0, 0)[0] == INF


def test_broadcast_single_cost():
    p = parse_problem(
        """
        states 2 inputs 1
        0 0 0 1 : 2.5
        1 0 0 : 1
        terminal 0 0
        """
    )
    assert np.array_equal(p.arc_costs(0, 0), [2.5, 2.5])


def test_parse_errors_name_lines():
    with pytest.raises(ParseError, match="line 3"):
        parse_problem("\nstates 2 inputs 1\n0 0 1\n")
    with pytest.raises(ParseError, match="header"):
        parse_problem("0 0 1 : 1\n")
    with pytest.raises(ParseError, match="strict"):
        parse_problem("states 2 inputs 1\n0 0 1 : 1\n")


def test_value_and_controller_text_round_trip(tmp_path):
    values = np.array([1.5, INF, -2.0])
    mu = np.array([0, FULL_SET, 3], dtype=np.int64)
    dump_values(values, tmp_path / "w.txt")
    dump_controller(mu, tmp_path / "mu.txt")
    assert np.array_equal(load_values(tmp_path / "w.txt"), values)
    assert np.array_equal(load_controller(tmp_path / "mu.txt"), mu)


def test_binary_round_trip(tmp_path):
    values = np.array([0.0, INF, -3.25, 1e-17])
    mu = np.array([FULL_SET, 2, 0, 1], dtype=np.int64)
    path = tmp_path / "sol.bin"
    dump_solution_binary(values, mu, path)
    v2, m2, n_inputs = load_solution_binary(path)
    assert np.array_equal(v2, values)
    assert np.array_equal(m2, mu)
    assert n_inputs == 3
    with open(path, "rb") as fh:
        assert fh.read(4) == b"SOCB"


def test_binary_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 40)
    with pytest.raises(ParseError):
        load_solution_binary(path)
