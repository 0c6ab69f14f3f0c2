"""Sampled continuous-time systems and the fixed-step integrator.

A :class:`VectorField` packages the right-hand side f(x, u), a per-input
growth-bound matrix L(u) whose entries bound the Jacobian of f over the
operating range (off-diagonal entries are absolute bounds and must be
non-negative; diagonal entries are signed suprema and may be negative),
and optional per-dimension speed bounds sup |f_d| used to size overflow
predecessor layers.

Sampling with period tau turns the flow into a transition map: the
successor of x under u is the solution at time tau.  Integration is
classical fourth-order Runge-Kutta with a fixed number of equal substeps;
the reverse flag integrates -f, which realises time-reversed dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class IntegrationBlowupError(ArithmeticError):
    """A state stopped being finite during integration."""


@dataclass(frozen=True)
class VectorField:
    """Right-hand side of x' = f(x, u) with growth-bound metadata.

    ``f`` must accept a batch of states shaped (k, dim) and one input
    vector shaped (input_dim,) and return (k, dim).  ``growth`` maps
    (u, reverse) to the growth-bound matrix of f (or of -f when reverse).
    """

    dim: int
    input_dim: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    growth: Callable[[np.ndarray, bool], np.ndarray]
    speed_bound: Optional[Callable[[np.ndarray], np.ndarray]] = None


def constant_growth_field(
    dim: int,
    input_dim: int,
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    growth_matrix,
    speed_bound=None,
) -> VectorField:
    """VectorField whose growth matrix does not depend on the input.

    The reverse-time matrix reuses the off-diagonal bounds and flips the
    sign of the diagonal (the Jacobian of -f is the negated Jacobian).
    """
    fwd = np.asarray(growth_matrix, dtype=np.float64)
    rev = fwd.copy()
    np.fill_diagonal(rev, -np.diagonal(fwd))

    def growth(u, reverse=False):
        return rev if reverse else fwd

    sb = None
    if speed_bound is not None:
        bound = np.asarray(speed_bound, dtype=np.float64)
        sb = lambda u: bound
    return VectorField(dim=dim, input_dim=input_dim, f=f, growth=growth, speed_bound=sb)


@dataclass(frozen=True)
class SampledSystem:
    """Sampled-data view of a vector field: one transition per period tau."""

    field: VectorField
    tau: float
    substeps: int = 5

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("sampling period must be positive")
        if self.substeps < 1:
            raise ValueError("need at least one integration substep")


def integrate_batch(
    sys: SampledSystem, x: np.ndarray, u: np.ndarray, reverse: bool = False
) -> np.ndarray:
    """Endpoints of the sampled flow for a batch of states, one input."""
    f = sys.field.f
    sign = -1.0 if reverse else 1.0
    h = sys.tau / sys.substeps
    y = np.array(x, dtype=np.float64, copy=True)
    u = np.asarray(u, dtype=np.float64)
    for _ in range(sys.substeps):
        k1 = sign * f(y, u)
        k2 = sign * f(y + 0.5 * h * k1, u)
        k3 = sign * f(y + 0.5 * h * k2, u)
        k4 = sign * f(y + h * k3, u)
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationBlowupError("integration produced a non-finite state")
    return y


def integrate(
    sys: SampledSystem, x, u, reverse: bool = False
) -> np.ndarray:
    """Endpoint of the sampled flow from a single state."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise IntegrationBlowupError("initial state is not finite")
    return integrate_batch(sys, x[None, :], u, reverse=reverse)[0]
