"""Production execution engine: parallel sweeps over batched relaxations.

The worklist algorithm is identical to :func:`symoc.solver.bellman_ford_yen`
but organised for scale:

* each sweep relaxes the whole active frontier against a value snapshot
  taken at sweep start (within-sweep updates from other workers can only
  accelerate later sweeps, never break monotonicity), making the final
  value map independent of chunking, worker count, and cache policy;
* the frontier is a sorted duplicate-free array partitioned into chunks;
  workers keep local improvement lists that are merged at sweep end;
* transition descriptors (forward images and predecessor supersets) are
  recomputed on demand and optionally cached under a byte budget: inserts
  stop once the accounted bytes reach the budget, and at every sweep end
  everything except the entries needed by the upcoming frontier is
  evicted.

Works on an implicit :class:`~symoc.abstraction.GridProblem` or an
explicit :class:`~symoc.problem.DiscreteProblem`.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .abstraction import GridProblem
from .problem import FULL_SET, INF, DiscreteProblem
from .solver import SolveReport


class MemoryBudgetError(RuntimeError):
    """The byte budget cannot hold one sweep's working set."""


@dataclass
class SolveOptions:
    worker_count: int = 1
    memory_budget_bytes: Optional[int] = None
    cache_policy: str = "all"  # all | budgeted | none
    metrics_interval: int = 1
    max_sweeps: Optional[int] = None
    chunk_size: int = 131072

    def __post_init__(self):
        if self.worker_count < 1:
            raise ValueError("worker_count must be at least 1")
        if self.cache_policy not in ("all", "budgeted", "none"):
            raise ValueError(f"unknown cache policy {self.cache_policy!r}")
        if self.cache_policy == "budgeted" and not self.memory_budget_bytes:
            raise ValueError("budgeted cache policy requires memory_budget_bytes > 0")


@dataclass
class SweepMetrics:
    sweep: int
    wall_ms: float
    frontier: int
    relaxations: int
    improved: int
    cache_bytes: int
    per_msec: float

    CSV_HEADER = "sweep,wall_ms,frontier,relaxations,improved,cache_bytes,per_msec"

    def csv_row(self) -> str:
        return (
            f"{self.sweep},{self.wall_ms:.3f},{self.frontier},{self.relaxations},"
            f"{self.improved},{self.cache_bytes},{self.per_msec:.3f}"
        )


class TransitionCache:
    """Byte-budgeted store of per-(cell, input) transition descriptors.

    Entries are the index-box descriptors of :class:`GridProblem`; a miss
    recomputes exactly what a hit would return.  Policy 'all' stores
    unconditionally, 'budgeted' admits new entries only while the
    accounted bytes stay at or below the budget, 'none' stores nothing.
    Eviction is strict sweep-boundary retention of the upcoming working
    set, so budget compliance holds at every sweep boundary.
    """

    def __init__(self, n_cells: int, n_inputs: int, dim: int, policy: str,
                 budget: Optional[int]):
        self.n_cells = n_cells
        self.n_inputs = n_inputs
        self.dim = dim
        self.policy = policy
        self.budget = budget if budget is not None else 0
        self.entry_bytes = 4 * dim + 1  # int16 start/span per dim + flag byte
        self.accounted = 0
        self._store = {}
        self._lock = threading.Lock()

    def _slot(self, mode: str, ui: int):
        key = (mode, ui)
        slot = self._store.get(key)
        if slot is None:
            with self._lock:
                slot = self._store.get(key)
                if slot is None:
                    slot = {
                        "start": np.zeros((self.n_cells, self.dim), dtype=np.int16),
                        "span": np.zeros((self.n_cells, self.dim), dtype=np.int16),
                        "ovf": np.zeros(self.n_cells, dtype=bool),
                        "valid": np.zeros(self.n_cells, dtype=bool),
                    }
                    self._store[key] = slot
        return slot

    def lookup(self, mode: str, ui: int, cells: np.ndarray):
        """Gather cached descriptors; returns (start, span, ovf, miss_mask)."""
        key = (mode, ui)
        slot = self._store.get(key)
        k = len(cells)
        if slot is None:
            return None, None, None, np.ones(k, dtype=bool)
        hit = slot["valid"][cells]
        return (
            slot["start"][cells].astype(np.int64),
            slot["span"][cells].astype(np.int64),
            slot["ovf"][cells],
            ~hit,
        )

    def insert(self, mode: str, ui: int, cells, start, span, ovf):
        if self.policy == "none" or len(cells) == 0:
            return
        if self.policy == "budgeted":
            with self._lock:
                room = (self.budget - self.accounted) // self.entry_bytes
                admit = int(min(len(cells), max(room, 0)))
                self.accounted += admit * self.entry_bytes
            if admit == 0:
                return
            cells, start, span, ovf = (
                cells[:admit], start[:admit], span[:admit], ovf[:admit]
            )
        else:
            with self._lock:
                self.accounted += len(cells) * self.entry_bytes
        slot = self._slot(mode, ui)
        slot["start"][cells] = start
        slot["span"][cells] = span
        slot["ovf"][cells] = ovf
        slot["valid"][cells] = True

    def evict_keep(self, keep_cells: np.ndarray):
        """Drop everything not needed by the upcoming frontier."""
        if self.policy != "budgeted":
            return
        keep = np.zeros(self.n_cells, dtype=bool)
        keep[keep_cells] = True
        required = 2 * self.n_inputs * len(keep_cells) * self.entry_bytes
        if required > self.budget:
            raise MemoryBudgetError(
                f"memory budget {self.budget} B cannot hold the next sweep's "
                f"working set; minimal feasible budget is {required} B"
            )
        with self._lock:
            total = 0
            for slot in self._store.values():
                slot["valid"] &= keep
                total += int(slot["valid"].sum())
            self.accounted = total * self.entry_bytes


class GridSession:
    """Solver-facing view of a GridProblem with caching and batched kernels."""

    def __init__(self, problem: GridProblem, options: SolveOptions):
        self.problem = problem
        self.cache = TransitionCache(
            problem.cover.n_cells,
            problem.n_inputs,
            problem.cover.dim,
            options.cache_policy,
            options.memory_budget_bytes,
        )
        self._g_add = np.stack(
            [problem.head_additive(ui) for ui in range(problem.n_inputs)]
        )
        self._z = np.empty((problem.n_inputs, problem.n_states))

    @property
    def n_states(self):
        return self.problem.n_states

    @property
    def n_inputs(self):
        return self.problem.n_inputs

    def terminal_values(self):
        return self.problem.terminal_values()

    def descriptors(self, cells: np.ndarray, ui: int, mode: str):
        start, span, ovf, miss = self.cache.lookup(mode, ui, cells)
        if start is None:
            start, span, ovf = self.problem.compute_descriptors(cells, ui, mode)
            self.cache.insert(mode, ui, cells, start, span, ovf)
            return start, span, ovf
        if np.any(miss):
            mc = cells[miss]
            ms, mp, mo = self.problem.compute_descriptors(mc, ui, mode)
            start[miss], span[miss], ovf[miss] = ms, mp, mo
            self.cache.insert(mode, ui, mc, ms, mp, mo)
        return start, span, ovf

    def prepare_sweep(self, w: np.ndarray):
        np.add(self._g_add, w[None, :], out=self._z)
        return self._z

    def relax(self, cells: np.ndarray, ui: int, ctx) -> np.ndarray:
        start, span, ovf = self.descriptors(cells, ui, "fwd")
        return self.problem.relax_with(start, span, ovf, ctx[ui])

    def pred_union(self, cells: np.ndarray) -> np.ndarray:
        if len(cells) == 0:
            return np.empty(0, dtype=np.int64)
        mark = np.zeros(self.problem.cover.n_cells, dtype=bool)
        step = 65536
        for lo in range(0, len(cells), step):
            part = cells[lo : lo + step]
            for ui in range(self.problem.n_inputs):
                start, span, _ = self.descriptors(part, ui, "pred")
                mark[self.problem.expand_descriptors(start, span)] = True
        return np.flatnonzero(mark)

    def sweep_end(self, retain_cells: np.ndarray) -> int:
        self.cache.evict_keep(retain_cells)
        return self.cache.accounted


class ExplicitSession:
    """Adapter running the batched sweeps over an explicit DiscreteProblem."""

    def __init__(self, problem: DiscreteProblem, options: SolveOptions,
                 pred_fn=None):
        self.problem = problem
        self.pred_fn = pred_fn

    @property
    def n_states(self):
        return self.problem.n_states

    @property
    def n_inputs(self):
        return self.problem.n_inputs

    def terminal_values(self):
        return self.problem.terminal.copy()

    def prepare_sweep(self, w: np.ndarray):
        return w.copy()

    def relax(self, cells: np.ndarray, ui: int, ctx) -> np.ndarray:
        p = self.problem
        arcs = cells * p.n_inputs + ui
        starts = p.arc_offsets[arcs]
        lens = p.arc_offsets[arcs + 1] - starts
        seg_start = np.cumsum(lens) - lens
        pos = np.arange(int(lens.sum())) - np.repeat(seg_start, lens) + np.repeat(
            starts, lens
        )
        t = p.costs[pos] + ctx[p.heads[pos]]
        return np.maximum.reduceat(t, seg_start)

    def pred_union(self, cells: np.ndarray) -> np.ndarray:
        p = self.problem
        out = set()
        for x in cells:
            if self.pred_fn is not None:
                for u in range(p.n_inputs):
                    out.update(int(y) for y in self.pred_fn(int(x), u))
            else:
                out.update(int(y) for y in p.predecessors_all_inputs(int(x)))
        return np.fromiter(sorted(out), dtype=np.int64, count=len(out))

    def sweep_end(self, retain_cells) -> int:
        return 0


def _make_session(problem, options: SolveOptions, pred_fn=None):
    if isinstance(problem, GridProblem):
        return GridSession(problem, options)
    if isinstance(problem, DiscreteProblem):
        return ExplicitSession(problem, options, pred_fn=pred_fn)
    raise TypeError(f"cannot solve a {type(problem).__name__}")


def solve_parallel(
    problem,
    pred_fn: Optional[Callable] = None,
    options: Optional[SolveOptions] = None,
    metrics_stream=None,
):
    """Run the worklist solve with parallel sweeps; returns (report, metrics).

    The converged value map is identical to the single-worker cache-all
    run for every (worker_count, cache_policy) combination; controllers
    may differ only in ways that realise the same values.  Metrics are
    emitted at sweep boundaries.
    """
    options = options or SolveOptions()
    session = _make_session(problem, options, pred_fn=pred_fn)
    n = session.n_states
    m = session.n_inputs

    w = session.terminal_values()
    mu = np.full(n, FULL_SET, dtype=np.int64)

    finite = np.flatnonzero(w < INF)
    frontier = session.pred_union(finite)

    cap = n if options.max_sweeps is None else min(options.max_sweeps, n)
    pool = (
        ThreadPoolExecutor(max_workers=options.worker_count)
        if options.worker_count > 1
        else None
    )

    metrics: list[SweepMetrics] = []
    total_relax = 0
    sweeps = 0

    if metrics_stream is not None:
        metrics_stream.write(SweepMetrics.CSV_HEADER + "\n")

    def process_chunk(chunk, ctx):
        improved_cells = []
        relax_count = 0
        for ui in range(m):
            d = session.relax(chunk, ui, ctx)
            relax_count += len(chunk)
            better = d < w[chunk]
            if np.any(better):
                sel = chunk[better]
                w[sel] = d[better]
                mu[sel] = ui
                improved_cells.append(sel)
        return improved_cells, relax_count

    try:
        while frontier.size and sweeps < cap:
            t0 = time.perf_counter()
            ctx = session.prepare_sweep(w)
            step = min(
                options.chunk_size,
                max(1024, -(-frontier.size // (4 * options.worker_count))),
            )
            chunks = [
                frontier[i : i + step] for i in range(0, frontier.size, step)
            ]
            improved_parts = []
            sweep_relax = 0
            if pool is None:
                for chunk in chunks:
                    got, cnt = process_chunk(chunk, ctx)
                    improved_parts.extend(got)
                    sweep_relax += cnt
            else:
                for got, cnt in pool.map(lambda c: process_chunk(c, ctx), chunks):
                    improved_parts.extend(got)
                    sweep_relax += cnt

            if improved_parts:
                improved = np.unique(np.concatenate(improved_parts))
            else:
                improved = np.empty(0, dtype=np.int64)
            frontier_size = frontier.size
            frontier = session.pred_union(improved)
            cache_bytes = session.sweep_end(frontier)

            total_relax += sweep_relax
            sweeps += 1
            wall_ms = (time.perf_counter() - t0) * 1e3
            row = SweepMetrics(
                sweep=sweeps,
                wall_ms=wall_ms,
                frontier=frontier_size,
                relaxations=sweep_relax,
                improved=int(improved.size),
                cache_bytes=int(cache_bytes),
                per_msec=frontier_size / wall_ms if wall_ms > 0 else 0.0,
            )
            metrics.append(row)
            if metrics_stream is not None and (
                sweeps % options.metrics_interval == 0
            ):
                metrics_stream.write(row.csv_row() + "\n")
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    report = SolveReport(
        converged=frontier.size == 0,
        sweeps=sweeps,
        relaxations=total_relax,
        values=w,
        controller=mu,
    )
    return report, metrics


def cache_get_or_compute(session: GridSession, key, kind: str) -> np.ndarray:
    """Transition set for one (cell, input) key, through the session cache.

    ``kind`` 'forward' returns the explicit head cells (overflow included
    when the enclosure escapes the range); 'pred' returns the predecessor
    superset cells.  A miss computes, stores if the policy admits, and
    returns a payload bit-identical to a hit.
    """
    cell, ui = key
    cells = np.asarray([cell], dtype=np.int64)
    if kind == "forward":
        start, span, ovf = session.descriptors(cells, ui, "fwd")
        heads = session.problem.expand_descriptors(start, span)
        if ovf[0]:
            heads = np.append(heads, session.problem.cover.overflow_index)
        return heads
    if kind == "pred":
        start, span, _ = session.descriptors(cells, ui, "pred")
        return np.unique(session.problem.expand_descriptors(start, span))
    raise ValueError(f"unknown transition kind {kind!r}")
