"""Hyper-rectangular grid covers with a single absorbing overflow cell.

The operating range ``[lower, upper]`` is partitioned into translated
copies of ``[0, eta_1] x ... x [0, eta_n]`` (row-major cell indexing).
Cells are half-open per dimension, ``[lo, lo + eta)``, with the last cell
closed at the range top, so every in-range point has exactly one cell and
boundary points resolve by floor.  Dimensions may be periodic (angular):
coordinates are wrapped into range before quantisation and index ranges
wrap around instead of overflowing.

Everything outside the range maps to one synthetic overflow cell with
index ``n_cells``; it stands in for all unbounded cover elements, which
are cost-equivalent in this package (absorbing, +inf).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_SNAP = 1e-9  # cell-unit tolerance for treating a coordinate as on-boundary


class QuantizeError(ValueError):
    pass


def _snap(q: np.ndarray) -> np.ndarray:
    r = np.round(q)
    return np.where(np.abs(q - r) < _SNAP, r, q)


@dataclass(frozen=True)
class GridCover:
    lower: np.ndarray
    upper: np.ndarray
    cells_per_dim: np.ndarray
    periodic: np.ndarray

    def __init__(self, lower, upper, cells_per_dim, periodic=None):
        lower = np.asarray(lower, dtype=np.float64)
        upper = np.asarray(upper, dtype=np.float64)
        cells = np.asarray(cells_per_dim, dtype=np.int64)
        if periodic is None:
            periodic = np.zeros(lower.size, dtype=bool)
        periodic = np.asarray(periodic, dtype=bool)
        if not (lower.shape == upper.shape == cells.shape == periodic.shape):
            raise ValueError("lower/upper/cells_per_dim/periodic shape mismatch")
        if np.any(upper <= lower):
            raise ValueError("operating range must have positive extent")
        if np.any(cells < 1):
            raise ValueError("need at least one cell per dimension")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "cells_per_dim", cells)
        object.__setattr__(self, "periodic", periodic)

    # -- derived geometry ----------------------------------------------------

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def eta(self) -> np.ndarray:
        return (self.upper - self.lower) / self.cells_per_dim

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells_per_dim))

    @property
    def overflow_index(self) -> int:
        return self.n_cells

    @property
    def n_states(self) -> int:
        """Grid cells plus the overflow cell."""
        return self.n_cells + 1

    @property
    def strides(self) -> np.ndarray:
        s = np.ones(self.dim, dtype=np.int64)
        for d in range(self.dim - 2, -1, -1):
            s[d] = s[d + 1] * self.cells_per_dim[d + 1]
        return s

    # -- index mapping ---------------------------------------------------------

    def encode(self, multi) -> np.ndarray:
        multi = np.asarray(multi, dtype=np.int64)
        return multi @ self.strides

    def decode(self, flat) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.int64)
        out = np.empty(flat.shape + (self.dim,), dtype=np.int64)
        rem = flat
        for d in range(self.dim):
            out[..., d] = rem // self.strides[d]
            rem = rem % self.strides[d]
        return out

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Wrap periodic coordinates into [lower, lower + span)."""
        x = np.array(x, dtype=np.float64, copy=True)
        for d in np.flatnonzero(self.periodic):
            span = self.upper[d] - self.lower[d]
            x[..., d] = np.mod(x[..., d] - self.lower[d], span) + self.lower[d]
        return x

    def quantize(self, x) -> int:
        """Cell index containing x; the overflow cell for x outside range."""
        return int(self.quantize_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def quantize_batch(self, x: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(np.asarray(x))):
            raise QuantizeError("cannot quantize a non-finite state")
        x = self.wrap(x)
        q = _snap((x - self.lower) / self.eta)
        idx = np.floor(q).astype(np.int64)
        outside = np.zeros(x.shape[0], dtype=bool)
        for d in range(self.dim):
            c = int(self.cells_per_dim[d])
            if self.periodic[d]:
                idx[:, d] = np.clip(idx[:, d], 0, c - 1)
            else:
                # the top boundary itself belongs to the last cell
                dim_outside = (idx[:, d] < 0) | (q[:, d] > c)
                outside |= dim_outside
                idx[:, d] = np.clip(idx[:, d], 0, c - 1)
        flat = self.encode(idx)
        flat[outside] = self.overflow_index
        return flat

    def cell_center(self, flat) -> np.ndarray:
        multi = self.decode(flat)
        return self.lower + (multi + 0.5) * self.eta

    def cell_box(self, flat):
        multi = self.decode(flat)
        lo = self.lower + multi * self.eta
        return lo, lo + self.eta

    # -- box -> index ranges -----------------------------------------------------

    def index_ranges(self, blo: np.ndarray, bhi: np.ndarray, rule: str):
        """Per-dimension index ranges of cells selected by a batch of boxes.

        rule 'image':  cells meeting the half-open box [blo, bhi) -- the
                       convention for attainable-set images, so a box that
                       exactly tiles a cell selects that cell alone;
        rule 'touch':  closed-closed intersection (conservative avoid tests);
        rule 'inside': cells entirely inside the closed box (conservative
                       target/reward tests).

        Returns ``(start, span, overflow)``: for each box and dimension the
        first selected index and the run length (wrapping around on
        periodic dimensions), plus a flag marking boxes that stick out of
        the range on some non-periodic dimension.  A span of zero means no
        cell qualifies along that dimension.
        """
        if rule not in ("image", "touch", "inside"):
            raise ValueError(f"unknown rule {rule!r}")
        blo = np.asarray(blo, dtype=np.float64)
        bhi = np.asarray(bhi, dtype=np.float64)
        k = blo.shape[0]
        qlo_all = (blo - self.lower) / self.eta
        qhi_all = (bhi - self.lower) / self.eta

        def bounds(ql, qh):
            ql, qh = _snap(ql), _snap(qh)
            if rule == "image":
                return np.floor(ql), np.ceil(qh) - 1
            if rule == "touch":
                return np.ceil(ql) - 1, np.floor(qh)
            return np.ceil(ql), np.floor(qh) - 1  # inside

        start = np.zeros((k, self.dim), dtype=np.int64)
        span = np.zeros((k, self.dim), dtype=np.int64)
        overflow = np.zeros(k, dtype=bool)
        for d in range(self.dim):
            c = int(self.cells_per_dim[d])
            ql, qh = qlo_all[:, d], qhi_all[:, d]
            if self.periodic[d]:
                full = (qh - ql) >= c
                lo_d, hi_d = bounds(
                    np.where(full, 0.0, ql), np.where(full, float(c), qh)
                )
                lo_d = lo_d.astype(np.int64)
                hi_d = hi_d.astype(np.int64)
                ln = np.minimum(hi_d - lo_d + 1, c)
                start[:, d] = np.where(full, 0, np.mod(lo_d, c))
                span[:, d] = np.where(full, c, np.maximum(ln, 0))
            else:
                lo_d, hi_d = bounds(
                    np.clip(ql, -2.0, c + 2.0), np.clip(qh, -2.0, c + 2.0)
                )
                lo_d = lo_d.astype(np.int64)
                hi_d = hi_d.astype(np.int64)
                if rule != "inside":
                    overflow |= (lo_d < 0) | (hi_d > c - 1)
                s = np.maximum(lo_d, 0)
                e = np.minimum(hi_d, c - 1)
                start[:, d] = np.clip(s, 0, c - 1)
                span[:, d] = np.maximum(e - s + 1, 0)
        return start, span, overflow

    def expand_ranges(self, start: np.ndarray, span: np.ndarray) -> list:
        """Flat cell indices selected by each (start, span) row."""
        out = []
        for i in range(start.shape[0]):
            if np.any(span[i] == 0):
                out.append(np.empty(0, dtype=np.int64))
                continue
            axes = []
            for d in range(self.dim):
                idx = start[i, d] + np.arange(span[i, d])
                if self.periodic[d]:
                    idx = np.mod(idx, self.cells_per_dim[d])
                axes.append(idx)
            grids = np.meshgrid(*axes, indexing="ij")
            flat = sum(g.astype(np.int64) * s for g, s in zip(grids, self.strides))
            out.append(flat.ravel())
        return out

    def mask_from_box(self, blo, bhi, rule: str) -> np.ndarray:
        """Boolean cell mask selected by a single box under the given rule."""
        start, span, _ = self.index_ranges(
            np.asarray(blo, dtype=np.float64)[None, :],
            np.asarray(bhi, dtype=np.float64)[None, :],
            rule,
        )
        mask = np.zeros(self.n_cells, dtype=bool)
        cells = self.expand_ranges(start, span)[0]
        mask[cells] = True
        return mask
