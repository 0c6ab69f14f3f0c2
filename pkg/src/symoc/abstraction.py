"""Finite abstractions of sampled systems over grid covers.

The abstract transition map sends a cell to every cell met by its
attainable-set enclosure box, plus the overflow cell whenever the box
leaks out of the operating range.  Cost lifting is conservative in the
directions that make the abstract problem dominate the concrete one:

* running cost is +inf whenever the head cell touches the avoid region or
  is the overflow cell (closed-box intersection test);
* a reward value applies only when the head cell lies entirely inside the
  reward region;
* terminal cost is finite only on cells entirely inside the target region
  (or is supplied per cell, e.g. a previously computed value map).

Two realisations share this construction: :func:`build_abstraction`
materialises an explicit :class:`~symoc.problem.DiscreteProblem` (small
covers, exhaustive tests), while :class:`GridProblem` keeps transitions
implicit as per-(cell, input) index-range descriptors and recomputes or
caches them on demand (the production path).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .enclosure import EnclosureModel
from .flow import SampledSystem
from .grid import GridCover
from .problem import INF, DiscreteProblem

MAX_HEADS_PER_ARC = 100_000


@dataclass
class CostModel:
    """Region-based cost lifting for grid abstractions.

    ``stage`` maps an input vector to the base running cost of a safe
    transition.  ``avoid``, ``target`` and ``reward`` are lists of
    ``(lo, hi)`` state-space boxes; +-inf entries mean the dimension is
    unconstrained.  ``terminal`` overrides the target mechanism with an
    explicit per-cell array (used when the terminal cost is a previously
    computed value map).
    """

    stage: Callable[[np.ndarray], float]
    avoid: Sequence = ()
    target: Sequence = ()
    target_value: float = 0.0
    terminal: Optional[np.ndarray] = None
    reward: Sequence = ()
    reward_value: float = 0.0

    def prepare(self, cover: GridCover) -> "CellCosts":
        n = cover.n_cells
        avoid = np.zeros(n, dtype=bool)
        for lo, hi in self.avoid:
            avoid |= cover.mask_from_box(lo, hi, "touch")
        reward = None
        if len(self.reward):
            reward = np.zeros(n, dtype=bool)
            for lo, hi in self.reward:
                reward |= cover.mask_from_box(lo, hi, "inside")
        if self.terminal is not None:
            if len(self.terminal) not in (n, n + 1):
                raise ValueError(
                    f"terminal override has {len(self.terminal)} entries "
                    f"for a cover with {n} cells"
                )
            terminal = np.full(n + 1, INF)
            terminal[:n] = np.asarray(self.terminal[:n], dtype=np.float64)
        else:
            inside = np.zeros(n, dtype=bool)
            for lo, hi in self.target:
                inside |= cover.mask_from_box(lo, hi, "inside")
            terminal = np.full(n + 1, INF)
            terminal[:n][inside] = self.target_value
        return CellCosts(avoid_mask=avoid, reward_mask=reward, terminal=terminal)


@dataclass
class CellCosts:
    avoid_mask: np.ndarray
    reward_mask: Optional[np.ndarray]
    terminal: np.ndarray  # n_cells + 1 entries, overflow last (+inf)


def _head_costs(cells: np.ndarray, costs: CellCosts, stage_value: float, reward_value):
    out = np.full(cells.shape, stage_value)
    if costs.reward_mask is not None:
        out[costs.reward_mask[cells]] = reward_value
    out[costs.avoid_mask[cells]] = INF
    return out


# -- explicit construction ----------------------------------------------------


def build_abstraction(
    sys: SampledSystem,
    cover: GridCover,
    inputs,
    cost_model: CostModel,
) -> DiscreteProblem:
    """Materialise the abstraction as an explicit finite problem.

    Memory grows with cells x inputs x heads; intended for covers up to
    roughly 1e4 cells.  The overflow cell is absorbing with +inf costs.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    costs = cost_model.prepare(cover)
    fwd = EnclosureModel(sys, cover, inputs, "forward")
    n_cells, ovf = cover.n_cells, cover.overflow_index

    transitions = {}
    running = {}
    all_cells = np.arange(n_cells, dtype=np.int64)
    for ui, u in enumerate(inputs):
        stage_value = float(cost_model.stage(u))
        blo, bhi = fwd.box_batch(all_cells, ui)
        start, span, overflow = cover.index_ranges(blo, bhi, "image")
        head_lists = cover.expand_ranges(start, span)
        for x in range(n_cells):
            heads = head_lists[x]
            cost = _head_costs(heads, costs, stage_value, cost_model.reward_value)
            if overflow[x] or heads.size == 0:
                heads = np.append(heads, ovf)
                cost = np.append(cost, INF)
            transitions[(x, ui)] = heads
            running[(x, ui)] = cost
        transitions[(ovf, ui)] = np.array([ovf])
        running[(ovf, ui)] = np.array([INF])

    return DiscreteProblem(
        cover.n_states, len(inputs), transitions, costs.terminal, running
    )


def boundary_layer(cover: GridCover, depth: np.ndarray) -> np.ndarray:
    """Cells within ``depth[d]`` cells of a non-periodic face, any dimension."""
    mask = np.zeros(cover.n_cells, dtype=bool)
    shape = tuple(int(c) for c in cover.cells_per_dim)
    view = mask.reshape(shape)
    for d in range(cover.dim):
        if cover.periodic[d]:
            continue
        k = int(min(depth[d], cover.cells_per_dim[d]))
        if k <= 0:
            continue
        sl_lo = [slice(None)] * cover.dim
        sl_hi = [slice(None)] * cover.dim
        sl_lo[d] = slice(0, k)
        sl_hi[d] = slice(shape[d] - k, shape[d])
        view[tuple(sl_lo)] = True
        view[tuple(sl_hi)] = True
    return np.flatnonzero(mask)


def pred_superset(
    sys: SampledSystem, cover: GridCover, inputs
) -> Callable[[int, int], np.ndarray]:
    """Per-(state, input) predecessor supersets from reverse-flow boxes.

    Sound against the built abstraction: the reverse radius is inflated by
    the forward enclosure slop (see :mod:`symoc.enclosure`).  Querying the
    overflow state returns the boundary layer of cells that could leave
    the range in one period, plus the overflow state itself.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    enc = EnclosureModel(sys, cover, inputs, "pred")
    fwd = EnclosureModel(sys, cover, inputs, "forward")

    layers = {}

    def layer(ui: int) -> np.ndarray:
        if ui not in layers:
            if sys.field.speed_bound is None:
                cells = np.arange(cover.n_cells, dtype=np.int64)
            else:
                speed = np.asarray(sys.field.speed_bound(inputs[ui]))
                reach = sys.tau * speed + fwd.radii[ui]
                depth = np.ceil(reach / cover.eta).astype(np.int64)
                cells = boundary_layer(cover, depth)
            layers[ui] = np.append(cells, cover.overflow_index)
        return layers[ui]

    def preds(x: int, ui: int) -> np.ndarray:
        if x == cover.overflow_index:
            return layer(ui)
        blo, bhi = enc.box(x, ui)
        start, span, _ = cover.index_ranges(blo[None, :], bhi[None, :], "image")
        return cover.expand_ranges(start, span)[0]

    return preds


# -- implicit construction (production path) ---------------------------------


class GridProblem:
    """Grid abstraction with lazily computed transition descriptors.

    Transitions are stored as per-(cell, input) index boxes -- start and
    run length per dimension plus an escapes-range flag -- rather than
    explicit head lists.  Running costs depend only on the head cell and
    the input, which matches the region cost models above and keeps
    worst-case relaxation vectorisable.
    """

    def __init__(self, sys: SampledSystem, cover: GridCover, inputs, cost_model):
        self.sys = sys
        self.cover = cover
        self.inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        self.cost_model = cost_model
        self.cell_costs = cost_model.prepare(cover)
        self.fwd = EnclosureModel(sys, cover, self.inputs, "forward")
        self.pred_enc = EnclosureModel(sys, cover, self.inputs, "pred")
        self.stage_values = np.array(
            [float(cost_model.stage(u)) for u in self.inputs]
        )

    @property
    def n_states(self) -> int:
        return self.cover.n_states

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    def terminal_values(self) -> np.ndarray:
        return self.cell_costs.terminal.copy()

    # descriptor computation (uncached) -----------------------------------

    def compute_descriptors(self, cells: np.ndarray, ui: int, mode: str):
        """(start, span, overflow) index ranges for a batch of cells."""
        if mode == "fwd":
            blo, bhi = self.fwd.box_batch(cells, ui)
            return self.cover.index_ranges(blo, bhi, "image")
        if mode == "pred":
            blo, bhi = self.pred_enc.box_batch(cells, ui)
            start, span, _ = self.cover.index_ranges(blo, bhi, "image")
            return start, span, np.zeros(len(cells), dtype=bool)
        raise ValueError(f"unknown descriptor mode {mode!r}")

    # relaxation ------------------------------------------------------------

    def head_additive(self, ui: int) -> np.ndarray:
        """Running-cost contribution of each potential head cell."""
        z = np.full(self.n_states, self.stage_values[ui])
        cc = self.cell_costs
        if cc.reward_mask is not None:
            z[: self.cover.n_cells][cc.reward_mask] = self.cost_model.reward_value
        z[: self.cover.n_cells][cc.avoid_mask] = INF
        z[self.cover.overflow_index] = INF
        return z

    def _offset_flats(self, start_rows: np.ndarray, shape):
        """Yield flat head indices per offset of one span shape.

        Precomputes the flat base index; a periodic dimension subtracts a
        full stride block wherever the offset walks past the range top.
        """
        strides = self.cover.strides
        cells_per_dim = self.cover.cells_per_dim
        base_flat = start_rows @ strides
        per_dims = np.flatnonzero(self.cover.periodic)
        for off in itertools.product(*(range(int(c)) for c in shape)):
            flat = base_flat + int(np.dot(off, strides))
            for dd in per_dims:
                if off[dd] > 0:
                    wrap = start_rows[:, dd] >= cells_per_dim[dd] - off[dd]
                    if np.any(wrap):
                        flat = flat - wrap * (cells_per_dim[dd] * strides[dd])
            yield flat

    def relax_with(self, start, span, overflow, z: np.ndarray) -> np.ndarray:
        """Worst head value per descriptor row: max over the box of z."""
        k = start.shape[0]
        d = np.full(k, -INF)
        if k == 0:
            return d
        key = _shape_key(span)
        for s in np.unique(key):
            rows = np.flatnonzero(key == s)
            shape = span[rows[0]]
            if np.any(shape == 0):
                d[rows] = INF
                continue
            if int(np.prod(shape)) > MAX_HEADS_PER_ARC:
                raise ValueError("descriptor box spans too many cells")
            acc = np.full(rows.size, -INF)
            for flat in self._offset_flats(start[rows], shape):
                np.maximum(acc, z[flat], out=acc)
            d[rows] = acc
        d[overflow] = INF
        return d

    def expand_descriptors(self, start, span) -> np.ndarray:
        """All head cells of a descriptor batch, concatenated (duplicates kept)."""
        k = start.shape[0]
        if k == 0:
            return np.empty(0, dtype=np.int64)
        out = []
        key = _shape_key(span)
        for s in np.unique(key):
            rows = np.flatnonzero(key == s)
            shape = span[rows[0]]
            if np.any(shape == 0):
                continue
            out.extend(self._offset_flats(start[rows], shape))
        if not out:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(out)

    # explicit views for tests and the scalar cache op ----------------------

    def head_cells(self, cell: int, ui: int) -> np.ndarray:
        """Explicit head set of one arc, overflow included when escaping."""
        cells = np.asarray([cell], dtype=np.int64)
        start, span, overflow = self.compute_descriptors(cells, ui, "fwd")
        heads = self.expand_descriptors(start, span)
        if overflow[0]:
            heads = np.append(heads, self.cover.overflow_index)
        return heads

    def pred_cells(self, cell: int, ui: int) -> np.ndarray:
        cells = np.asarray([cell], dtype=np.int64)
        start, span, _ = self.compute_descriptors(cells, ui, "pred")
        return np.unique(self.expand_descriptors(start, span))


def _shape_key(span: np.ndarray) -> np.ndarray:
    key = np.zeros(span.shape[0], dtype=np.int64)
    for d in range(span.shape[1]):
        key = key * 1024 + span[:, d]
    return key
