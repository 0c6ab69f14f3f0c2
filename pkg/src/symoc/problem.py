"""Finite worst-case optimal control problems on directed hypergraphs.

A problem couples a strict transition map F : X x U -> 2^X \\ {{}} with a
terminal cost G : X -> R u {+inf} and a running cost g : X x X x U -> R u
{+inf}.  Under an input u the successor is chosen adversarially from
F(x, u), so evaluating an arc means taking the worst (maximum) cost over
its head set.  Neither cost may take -inf; +inf is absorbing.

States and inputs are dense integer indices.  Hyperarcs are stored in a
CSR-style layout: for the arc (x, u) the heads and the per-head running
costs live in ``heads[arc_offsets[a] : arc_offsets[a + 1]]`` with
``a = x * n_inputs + u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

INF = float("inf")

FULL_SET = -1  # controller sentinel: every input allowed (hand control over)


class InvalidTrajectoryError(ValueError):
    """A state/input prefix violates the transition map."""


class ProblemFormatError(ValueError):
    """Problem data breaks a structural invariant (strictness, ranges)."""


@dataclass(frozen=True)
class SignalPrefix:
    """A finite closed-loop prefix x(0..T), u(0..T-1) with termination at T.

    ``len(states) == len(inputs) + 1`` always; the termination index T is
    implied by the lengths.  Infinite non-terminating runs are not
    representable; their cost is the +inf evaluation path.
    """

    states: tuple
    inputs: tuple

    def __post_init__(self):
        if len(self.states) != len(self.inputs) + 1:
            raise InvalidTrajectoryError(
                f"need len(states) == len(inputs) + 1, got "
                f"{len(self.states)} states and {len(self.inputs)} inputs"
            )

    @property
    def termination_index(self) -> int:
        return len(self.inputs)


class DiscreteProblem:
    """Optimal control problem (X, U, F, G, g) with adversarial heads.

    Parameters
    ----------
    n_states, n_inputs:
        Sizes of the dense index ranges for X and U.
    transitions:
        Mapping ``(x, u) -> sequence of successor states``.  Every pair in
        ``range(n_states) x range(n_inputs)`` must be present and non-empty
        (strictness).
    terminal_cost:
        Sequence of length ``n_states``; entries in R u {+inf}.
    running_cost:
        Mapping ``(x, u) -> sequence of per-head costs`` aligned with
        ``transitions[(x, u)]``, or a scalar per arc which broadcasts over
        the heads.  Entries in R u {+inf}.
    """

    def __init__(
        self,
        n_states: int,
        n_inputs: int,
        transitions: Mapping,
        terminal_cost: Sequence[float],
        running_cost: Mapping,
    ):
        if n_states <= 0 or n_inputs <= 0:
            raise ProblemFormatError("need at least one state and one input")
        self.n_states = int(n_states)
        self.n_inputs = int(n_inputs)

        offsets = np.zeros(n_states * n_inputs + 1, dtype=np.int64)
        head_chunks = []
        cost_chunks = []
        for x in range(n_states):
            for u in range(n_inputs):
                try:
                    heads = np.asarray(transitions[(x, u)], dtype=np.int64)
                except KeyError:
                    raise ProblemFormatError(
                        f"transition map is not strict: F({x},{u}) missing"
                    ) from None
                if heads.size == 0:
                    raise ProblemFormatError(
                        f"transition map is not strict: F({x},{u}) is empty"
                    )
                if heads.min() < 0 or heads.max() >= n_states:
                    raise ProblemFormatError(
                        f"F({x},{u}) contains an out-of-range state index"
                    )
                costs = running_cost[(x, u)]
                costs = np.broadcast_to(
                    np.asarray(costs, dtype=np.float64), heads.shape
                ).copy()
                if np.any(np.isneginf(costs)) or np.any(np.isnan(costs)):
                    raise ProblemFormatError(
                        f"running cost on arc ({x},{u}) must lie in R u {{+inf}}"
                    )
                a = x * n_inputs + u
                offsets[a + 1] = offsets[a] + heads.size
                head_chunks.append(heads)
                cost_chunks.append(costs)

        self.arc_offsets = offsets
        self.heads = np.concatenate(head_chunks)
        self.costs = np.concatenate(cost_chunks)

        term = np.asarray(terminal_cost, dtype=np.float64)
        if term.shape != (n_states,):
            raise ProblemFormatError("terminal cost must have one entry per state")
        if np.any(np.isneginf(term)) or np.any(np.isnan(term)):
            raise ProblemFormatError("terminal cost must lie in R u {+inf}")
        self.terminal = term

        self._pred_csr = None

    # -- basic accessors ---------------------------------------------------

    def successors(self, x: int, u: int) -> np.ndarray:
        a = x * self.n_inputs + u
        return self.heads[self.arc_offsets[a] : self.arc_offsets[a + 1]]

    def arc_costs(self, x: int, u: int) -> np.ndarray:
        a = x * self.n_inputs + u
        return self.costs[self.arc_offsets[a] : self.arc_offsets[a + 1]]

    def running_cost(self, x: int, y: int, u: int) -> float:
        """g(x, y, u); defined only for y in F(x, u)."""
        heads = self.successors(x, u)
        hits = np.flatnonzero(heads == y)
        if hits.size == 0:
            raise InvalidTrajectoryError(f"{y} is not in F({x},{u})")
        return float(self.arc_costs(x, u)[hits[0]])

    @property
    def total_heads(self) -> int:
        """m = sum over (x, u) of |F(x, u)|, the Theorem-3 size measure."""
        return int(self.heads.size)

    # -- predecessor structure ---------------------------------------------

    def _build_pred(self):
        n, m = self.n_states, self.n_inputs
        counts = np.zeros(n * m + 1, dtype=np.int64)
        arc_of_head = np.repeat(np.arange(n * m), np.diff(self.arc_offsets))
        tails = arc_of_head // m
        inputs = arc_of_head % m
        slot = self.heads * m + inputs
        np.add.at(counts, slot + 1, 1)
        starts = np.cumsum(counts)
        data = np.empty(self.heads.size, dtype=np.int64)
        fill = starts[:-1].copy()
        for i in range(self.heads.size):
            s = slot[i]
            data[fill[s]] = tails[i]
            fill[s] += 1
        self._pred_csr = (starts, data)

    def predecessors(self, x: int, u: int) -> np.ndarray:
        """pred(x, u) = { y : x in F(y, u) }, sorted and duplicate-free."""
        if self._pred_csr is None:
            self._build_pred()
        starts, data = self._pred_csr
        s = x * self.n_inputs + u
        return np.unique(data[starts[s] : starts[s + 1]])

    def predecessors_all_inputs(self, x: int) -> np.ndarray:
        """Union of pred(x, u) over every input u."""
        if self._pred_csr is None:
            self._build_pred()
        starts, data = self._pred_csr
        lo = x * self.n_inputs
        return np.unique(data[starts[lo] : starts[lo + self.n_inputs]])


def predecessors(problem: DiscreteProblem, x: int, u: int) -> set:
    """Exact hypergraph predecessors of state x under input u."""
    return set(int(s) for s in problem.predecessors(x, u))


# -- evaluation operations ---------------------------------------------------


def cost_functional(problem: DiscreteProblem, prefix: SignalPrefix) -> float:
    """Total cost of a finite prefix: terminal at T plus accumulated running.

    Raises :class:`InvalidTrajectoryError` if a step leaves the transition
    map.  Any +inf summand makes the result +inf.
    """
    total = problem.terminal[prefix.states[-1]]
    for t, u in enumerate(prefix.inputs):
        x, y = prefix.states[t], prefix.states[t + 1]
        total = total + problem.running_cost(x, y, u)
    return float(total)


def _arc_value(problem: DiscreteProblem, x: int, u: int, w: np.ndarray) -> float:
    """max over heads of g(x, y, u) + w(y); +inf absorbing."""
    a = x * problem.n_inputs + u
    lo, hi = problem.arc_offsets[a], problem.arc_offsets[a + 1]
    return float(np.max(problem.costs[lo:hi] + w[problem.heads[lo:hi]]))


def dp_operator(problem: DiscreteProblem, w: Sequence[float]) -> np.ndarray:
    """One application of the worst-case dynamic programming operator.

    Returns ``x -> min(G(x), min_u max_{y in F(x,u)} g(x,y,u) + w(y))``.
    """
    w = np.asarray(w, dtype=np.float64)
    out = problem.terminal.copy()
    for x in range(problem.n_states):
        for u in range(problem.n_inputs):
            d = _arc_value(problem, x, u, w)
            if d < out[x]:
                out[x] = d
    return out


def controller_choices(problem: DiscreteProblem, mu: np.ndarray, x: int) -> list:
    """Input set assigned at x: a singleton, or all inputs on FULL_SET."""
    if mu[x] == FULL_SET:
        return list(range(problem.n_inputs))
    return [int(mu[x])]


def policy_performance(
    problem: DiscreteProblem,
    mu: np.ndarray,
    max_sweeps: int | None = None,
) -> np.ndarray:
    """Worst-case closed-loop cost of the controller mu, per start state.

    Computes the maximal fixed point of the dynamic programming operator
    with the input minimisation restricted to mu(x), iterating downward
    from W = G.  The sweep count is capped at ``n_states`` by default;
    entries still descending at the cap carry no finite certificate and
    are reported as +inf.
    """
    mu = np.asarray(mu)
    if mu.shape != (problem.n_states,):
        raise ProblemFormatError("controller must assign a choice to every state")
    cap = problem.n_states if max_sweeps is None else max_sweeps

    def apply(w):
        nxt = problem.terminal.copy()
        for x in range(problem.n_states):
            for u in controller_choices(problem, mu, x):
                d = _arc_value(problem, x, u, w)
                if d < nxt[x]:
                    nxt[x] = d
        return nxt

    w = problem.terminal.copy()
    for _ in range(cap + 1):
        nxt = apply(w)
        if np.array_equal(nxt, w):
            return w
        w = nxt
    # no fixed point within the cap: entries still descending carry no
    # finite certificate
    w[apply(w) != w] = INF
    return w
