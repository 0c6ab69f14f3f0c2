"""Planar point-mass fixed-wing aircraft dynamics.

State is (x1, x2, heading, speed); inputs are thrust and bank angle (all
angles in radians).  The airframe loses its payload mass instantaneously
when the water is released, so the same kinematics run with two masses:
``loaded`` (tank full) on the way out and ``empty`` on the way home.

The growth-bound matrices bound the Jacobian over an operating range
whose speed interval must be supplied (plus a safety margin covering the
speed excursion within one sampling period); heading is unconstrained, so
the position rows use the worst-case |sin| = |cos| = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import VectorField

DEG = np.pi / 180.0


@dataclass(frozen=True)
class AircraftParams:
    mass_empty: float = 4250.0
    mass_loaded: float = 6250.0
    drag: float = 1.8
    lift: float = 85.0
    thrust_max: float = 18e3
    bank_max: float = 40.0 * DEG

    def __post_init__(self):
        if self.mass_empty <= 0 or self.mass_loaded <= 0:
            raise ValueError("masses must be positive")
        if self.thrust_max <= 0 or self.bank_max <= 0:
            raise ValueError("input ranges must be non-degenerate")

    def mass(self, sigma: int) -> float:
        """sigma 1: empty tank; sigma 2: loaded tank."""
        if sigma == 1:
            return self.mass_empty
        if sigma == 2:
            return self.mass_loaded
        raise ValueError("sigma must be 1 (empty) or 2 (loaded)")


def aircraft_field(
    params: AircraftParams,
    sigma: int,
    speed_range: tuple = (50.0, 85.0),
    speed_margin: float = 2.0,
) -> VectorField:
    """Vector field for the chosen tank state, with growth-bound metadata.

    ``speed_range`` is the speed interval of the operating range; the
    growth bound and speed bounds are taken over that interval widened by
    ``speed_margin`` on both sides (trajectories may overshoot the range
    within a sampling period).
    """
    m = params.mass(sigma)
    drag, lift = params.drag, params.lift

    def f(x, u):
        v = x[:, 3]
        return np.stack(
            [
                v * np.cos(x[:, 2]),
                v * np.sin(x[:, 2]),
                (lift / m) * v * np.sin(u[1]),
                (u[0] - drag * v * v) / m,
            ],
            axis=1,
        )

    v_lo = max(speed_range[0] - speed_margin, 0.0)
    v_hi = speed_range[1] + speed_margin

    def growth(u, reverse=False):
        L = np.zeros((4, 4))
        L[0, 2] = v_hi  # |d(v cos h)/dh| <= v
        L[0, 3] = 1.0
        L[1, 2] = v_hi
        L[1, 3] = 1.0
        L[2, 3] = (lift / m) * abs(np.sin(u[1]))
        if reverse:
            L[3, 3] = 2.0 * drag * v_hi / m
        else:
            L[3, 3] = -2.0 * drag * v_lo / m
        return L

    def speed_bound(u):
        return np.array(
            [
                v_hi,
                v_hi,
                (lift / m) * v_hi * abs(np.sin(u[1])),
                max(params.thrust_max, drag * v_hi * v_hi) / m,
            ]
        )

    return VectorField(
        dim=4, input_dim=2, f=f, growth=growth, speed_bound=speed_bound
    )
