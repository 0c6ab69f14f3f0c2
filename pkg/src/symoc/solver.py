"""Worklist solver for worst-case optimal control on finite hypergraphs.

``bellman_ford_yen`` is the single-threaded reference implementation.  It
keeps two FIFO frontiers (active / upcoming) with membership bitsets so a
state enters a frontier at most once per sweep, relaxes every
(state, input) pair of the active frontier against the current value
array, and stops when the frontier empties or after ``n_states`` sweeps.
An emptied frontier certifies that the value array is the value function
and that the returned controller realises it; hitting the sweep cap means
a value could still be descending (a reachable negative-cost cycle), and
no optimality claim is made.

Strict-improvement tests use exact floating comparison.  Pathological
float noise can therefore cost extra sweeps, never a wrong fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .problem import FULL_SET, INF, DiscreteProblem, _arc_value

PredFn = Callable[[int, int], Iterable[int]]


@dataclass
class SolveReport:
    """Outcome of a solver run.

    ``converged`` is True iff the frontier emptied; only then do ``values``
    equal the value function and does ``controller`` realise it.
    ``relaxations`` counts arc evaluations (one per (state, input) pair
    processed); it is bounded by n_states * total_heads.
    """

    converged: bool
    sweeps: int
    relaxations: int
    values: np.ndarray
    controller: np.ndarray

    def choices(self, x: int, n_inputs: int) -> set:
        if self.controller[x] == FULL_SET:
            return set(range(n_inputs))
        return {int(self.controller[x])}


def bellman_ford_yen(
    problem: DiscreteProblem,
    pred_fn: Optional[PredFn] = None,
    max_sweeps: Optional[int] = None,
) -> SolveReport:
    """Solve a finite worst-case optimal control problem.

    Parameters
    ----------
    problem:
        The instance to solve.
    pred_fn:
        Optional ``(x, u) -> iterable of states`` returning a superset of
        the exact hypergraph predecessors.  Defaults to the exact ones.
        Supersets only cause extra relaxations, never wrong results.
    max_sweeps:
        Optional earlier cutoff for the sweep guard; defaults to
        ``n_states``.  A lower cap only affects when non-convergence is
        reported.
    """
    n, m = problem.n_states, problem.n_inputs
    if pred_fn is None:
        pred_fn = problem.predecessors

    w = problem.terminal.copy()
    mu = np.full(n, FULL_SET, dtype=np.int64)

    cap = n if max_sweeps is None else min(max_sweeps, n)

    active: list[int] = []
    in_active = np.zeros(n, dtype=bool)
    for x in range(n):
        if w[x] < INF:
            for u in range(m):
                for y in pred_fn(x, u):
                    if not in_active[y]:
                        in_active[y] = True
                        active.append(y)

    sweeps = 0
    relaxations = 0
    while active and sweeps < cap:
        upcoming: list[int] = []
        in_upcoming = np.zeros(n, dtype=bool)
        for x in active:
            for u in range(m):
                d = _arc_value(problem, x, u, w)
                relaxations += 1
                if d < w[x]:
                    w[x] = d
                    mu[x] = u
                    for uu in range(m):
                        for y in pred_fn(x, uu):
                            if not in_upcoming[y]:
                                in_upcoming[y] = True
                                upcoming.append(y)
        active = upcoming
        sweeps += 1

    return SolveReport(
        converged=not active,
        sweeps=sweeps,
        relaxations=relaxations,
        values=w,
        controller=mu,
    )
