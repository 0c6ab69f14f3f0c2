"""Attainable-set overapproximation by center-plus-radius boxes.

A grid cell is a box of half-width eta/2 around its center.  The cell
center is integrated over one sampling period and the half-width is
propagated through the growth bound: r' = expm(L(u) * tau) @ r.  The
resulting axis-aligned box encloses the attainable set of the whole cell
whenever L bounds the Jacobian of the field over the flow tube (validated
in tests by Monte-Carlo containment, not proven here).

Forward boxes realise the abstract transition map; reverse boxes (same
construction on -f) support predecessor queries.  Predecessor supersets
need a fatter radius than the plain reverse attainable set: the built
transition map already overapproximates, so a predecessor of cell C is
any cell whose *forward box* -- not just its true attainable set --
meets C.  If cell Y is such a predecessor, the forward image of Y's
center lies within r_fwd + eta/2 of C's center, so propagating
(r_fwd + eta/2) through the reverse growth bound bounds the distance
from Y's center to the reverse image of C's center, and collecting every
cell that meets that box covers all candidate centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .flow import SampledSystem, integrate, integrate_batch
from .grid import GridCover


def propagated_radius(
    sys: SampledSystem, u: np.ndarray, radius: np.ndarray, reverse: bool = False
) -> np.ndarray:
    """Half-width vector after one period: expm(L(u) tau) @ radius."""
    L = np.asarray(sys.field.growth(np.asarray(u, dtype=np.float64), reverse))
    return expm(L * sys.tau) @ np.asarray(radius, dtype=np.float64)


def attainable_box(
    sys: SampledSystem, cover: GridCover, cell: int, u, reverse: bool = False
):
    """Axis-aligned box enclosing the one-period image of a grid cell."""
    u = np.asarray(u, dtype=np.float64)
    center = integrate(sys, cover.cell_center(cell), u, reverse=reverse)
    r = propagated_radius(sys, u, cover.eta / 2.0, reverse=reverse)
    return center - r, center + r


class EnclosureModel:
    """Per-(cell, input) enclosure boxes for one flow direction.

    mode 'forward' encloses the sampled flow of f; mode 'reverse' the flow
    of -f; mode 'pred' is the reverse flow with the radius inflated by the
    forward box slop, yielding predecessor supersets of the built
    abstraction.
    """

    def __init__(self, sys: SampledSystem, cover: GridCover, inputs, mode="forward"):
        if mode not in ("forward", "reverse", "pred"):
            raise ValueError(f"unknown mode {mode!r}")
        self.sys = sys
        self.cover = cover
        self.inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
        self.mode = mode
        self.reverse = mode != "forward"
        half = cover.eta / 2.0
        radii = []
        for u in self.inputs:
            if mode == "pred":
                r_fwd = propagated_radius(sys, u, half, reverse=False)
                radii.append(propagated_radius(sys, u, r_fwd + half, reverse=True))
            else:
                radii.append(propagated_radius(sys, u, half, reverse=self.reverse))
        self.radii = np.asarray(radii)

    def box(self, cell: int, u_index: int):
        center = integrate(
            self.sys, self.cover.cell_center(cell), self.inputs[u_index],
            reverse=self.reverse,
        )
        r = self.radii[u_index]
        return center - r, center + r

    def box_batch(self, cells: np.ndarray, u_index: int):
        centers = self.cover.cell_center(np.asarray(cells, dtype=np.int64))
        ends = integrate_batch(
            self.sys, centers, self.inputs[u_index], reverse=self.reverse
        )
        r = self.radii[u_index]
        return ends - r, ends + r
