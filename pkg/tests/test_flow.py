from __future__ import annotations

import numpy as np
import pytest

from symoc.flow import (
    IntegrationBlowupError,
    SampledSystem,
    VectorField,
    constant_growth_field,
    integrate,
    integrate_batch,
)


def stationary():
    return constant_growth_field(
        2, 1, lambda x, u: np.zeros_like(x), np.zeros((2, 2))
    )


def drift():
    # x' = u, exact under RK4
    return constant_growth_field(
        1, 1, lambda x, u: np.full_like(x, u[0]), np.zeros((1, 1))
    )


def test_stationary_field_is_identity():
    sys = SampledSystem(stationary(), tau=1.0)
    x = np.array([0.3, -2.0])
    assert np.array_equal(integrate(sys, x, [0.0]), x)


def test_constant_field_exact():
    sys = SampledSystem(drift(), tau=0.45)
    out = integrate(sys, [0.0], [2.0])
    assert out[0] == pytest.approx(0.9, abs=1e-15)


def test_reverse_undoes_forward():
    field = constant_growth_field(
        2,
        1,
        lambda x, u: np.stack([x[:, 1], -np.sin(x[:, 0])], axis=1),
        [[0.0, 1.0], [1.0, 0.0]],
    )
    sys = SampledSystem(field, tau=0.45, substeps=10)
    x0 = np.array([0.4, -0.2])
    fwd = integrate(sys, x0, [0.0])
    back = integrate(sys, fwd, [0.0], reverse=True)
    assert np.linalg.norm(back - x0) <= 1e-6 * (1 + np.linalg.norm(x0))


def test_rk4_order_against_fine_reference():
    # scalar v' = (u - 1.8 v^2) / m, the speed row of the aircraft model
    def f(x, u):
        return (u[0] - 1.8 * x**2) / 4250.0

    field = constant_growth_field(1, 1, lambda x, u: f(x, u), [[0.0]])
    coarse = SampledSystem(field, tau=0.45, substeps=5)
    fine = SampledSystem(field, tau=0.45, substeps=1000)
    a = integrate(coarse, [53.0], [9000.0])
    b = integrate(fine, [53.0], [9000.0])
    assert abs(a[0] - b[0]) < 1e-10


def test_batch_matches_scalar():
    field = constant_growth_field(
        2, 1, lambda x, u: np.stack([x[:, 1], u[0] - x[:, 0]], axis=1),
        [[0, 1], [1, 0]],
    )
    sys = SampledSystem(field, tau=0.3, substeps=4)
    pts = np.random.default_rng(0).normal(size=(20, 2))
    batch = integrate_batch(sys, pts, [0.7])
    for i in range(20):
        assert np.allclose(batch[i], integrate(sys, pts[i], [0.7]), atol=1e-14)


def test_blowup_detected():
    field = constant_growth_field(1, 1, lambda x, u: x**3, [[1.0]])
    sys = SampledSystem(field, tau=10.0, substeps=3)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(IntegrationBlowupError):
            integrate(sys, [5.0], [0.0])


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        SampledSystem(stationary(), tau=0.0)
    with pytest.raises(ValueError):
        SampledSystem(stationary(), tau=1.0, substeps=0)
