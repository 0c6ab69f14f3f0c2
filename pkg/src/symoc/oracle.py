"""Independent references for checking the worklist solver.

``value_iteration_oracle`` iterates the dynamic programming operator from
W = G until it stabilises: the limit, when reached, is the maximal fixed
point and hence the value function.  It shares no code path with the
frontier solver beyond the problem accessors, and is intended for small
instances (n_states up to ~1e3).

``dijkstra_minmax`` is a test-only priority-queue solver valid when both
cost functions are non-negative: a state is finalised in ascending value
order, and an arc is relaxed once all of its heads are final (the max
over heads can then no longer change).

``random_problem`` generates the seeded instance family used by the
randomized equivalence suites.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .problem import INF, DiscreteProblem, dp_operator


@dataclass
class OracleResult:
    values: np.ndarray
    stabilized: bool
    iterations: int


def value_iteration_oracle(
    problem: DiscreteProblem, max_iters: int | None = None
) -> OracleResult:
    """Pointwise limit of repeated DP-operator application from W = G.

    Stabilisation within ``n_states`` iterations certifies the maximal
    fixed point on instances free of negative-cost cycles; the default
    budget is twice that plus a slack of two, since this oracle updates
    all states simultaneously rather than in sweep order.
    """
    if max_iters is None:
        max_iters = 2 * problem.n_states + 2
    w = problem.terminal.copy()
    for k in range(max_iters):
        nxt = dp_operator(problem, w)
        if np.array_equal(nxt, w):
            return OracleResult(values=w, stabilized=True, iterations=k)
        w = nxt
    return OracleResult(values=w, stabilized=False, iterations=max_iters)


def dijkstra_minmax(problem: DiscreteProblem) -> np.ndarray:
    """Reference solver for instances with G >= 0 and g >= 0.

    Not part of the production surface; used to cross-check the worklist
    solver on non-negative instances.
    """
    if np.any(problem.terminal < 0) or np.any(problem.costs < 0):
        raise ValueError("dijkstra_minmax requires non-negative costs")
    n, m = problem.n_states, problem.n_inputs

    w = problem.terminal.copy()
    final = np.zeros(n, dtype=bool)
    # unfinalised-head counters per arc
    remaining = np.diff(problem.arc_offsets).astype(np.int64)
    heap = [(w[x], x) for x in range(n) if w[x] < INF]
    heapq.heapify(heap)

    while heap:
        wx, x = heapq.heappop(heap)
        if final[x] or wx > w[x]:
            continue
        final[x] = True
        # arcs that contain x as a head may become fully finalised
        for y in problem.predecessors_all_inputs(x):
            for u in range(m):
                a = y * m + u
                heads = problem.successors(y, u)
                if not np.any(heads == x):
                    continue
                remaining[a] -= np.count_nonzero(heads == x)
                if remaining[a] == 0:
                    d = float(np.max(problem.arc_costs(y, u) + w[heads]))
                    if d < w[y]:
                        w[y] = d
                        heapq.heappush(heap, (d, y))
    return w


def random_problem(
    rng: np.random.Generator,
    max_states: int = 32,
    max_inputs: int = 4,
    max_heads: int = 3,
    cost_range: tuple = (-3.0, 5.0),
    terminal_range: tuple = (0.0, 10.0),
    p_cost_inf: float = 0.15,
    p_terminal_inf: float = 0.35,
) -> DiscreteProblem:
    """Sample a random instance from the randomized-suite family.

    Head sets are small (up to ``max_heads`` distinct states per arc);
    running costs mix a point mass at +inf with a uniform range that may
    include negative values.  Pass ``cost_range=(0.0, 5.0)`` for the
    non-negative family.
    """
    n = int(rng.integers(2, max_states + 1))
    m = int(rng.integers(1, max_inputs + 1))
    transitions = {}
    running = {}
    for x in range(n):
        for u in range(m):
            k = int(rng.integers(1, max_heads + 1))
            heads = rng.choice(n, size=min(k, n), replace=False)
            costs = rng.uniform(cost_range[0], cost_range[1], size=heads.size)
            costs[rng.random(heads.size) < p_cost_inf] = INF
            transitions[(x, u)] = heads
            running[(x, u)] = costs
    terminal = rng.uniform(terminal_range[0], terminal_range[1], size=n)
    terminal[rng.random(n) < p_terminal_inf] = INF
    if np.all(np.isinf(terminal)):
        terminal[int(rng.integers(0, n))] = float(
            rng.uniform(terminal_range[0], terminal_range[1])
        )
    return DiscreteProblem(n, m, transitions, terminal, running)
