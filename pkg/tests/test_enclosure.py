from __future__ import annotations

import numpy as np
import pytest

from symoc.enclosure import EnclosureModel, attainable_box, propagated_radius
from symoc.flow import SampledSystem, constant_growth_field
from symoc.grid import GridCover


def stationary(dim=1):
    return constant_growth_field(
        dim, 1, lambda x, u: np.zeros_like(x), np.zeros((dim, dim))
    )


def test_zero_field_zero_growth_box_is_cell():
    cover = GridCover([0.0], [1.0], [4])
    sys = SampledSystem(stationary(), tau=1.0)
    lo, hi = attainable_box(sys, cover, 2, [0.0])
    clo, chi = cover.cell_box(2)
    assert np.allclose(lo, clo) and np.allclose(hi, chi)


def test_linear_field_analytic_radius():
    # x' = a x: center and radius both scale by e^{a tau}
    a = 0.7
    field = constant_growth_field(1, 1, lambda x, u: a * x, [[a]])
    tau = 0.45
    sys = SampledSystem(field, tau=tau, substeps=50)
    cover = GridCover([0.0], [1.0], [1])
    lo, hi = attainable_box(sys, cover, 0, [0.0])
    growth = np.exp(a * tau)
    assert (hi[0] - lo[0]) / 2 == pytest.approx(growth * 0.5, rel=1e-12)
    # RK4 center error is O(tau^5 / substeps^4)
    assert (hi[0] + lo[0]) / 2 == pytest.approx(growth * 0.5, rel=1e-9)


def test_monte_carlo_containment_nonlinear():
    # rotating nonlinear field; growth matrix bounds |J| over the range
    def f(x, u):
        return np.stack([x[:, 1], -np.sin(x[:, 0]) - 0.1 * x[:, 1]], axis=1)

    field = constant_growth_field(2, 1, f, [[0.0, 1.0], [1.0, -0.1]])
    sys = SampledSystem(field, tau=0.45, substeps=10)
    cover = GridCover([-1.0, -1.0], [1.0, 1.0], [10, 10])
    model = EnclosureModel(sys, cover, [[0.0]], "forward")
    rng = np.random.default_rng(42)
    from symoc.flow import integrate_batch

    for cell in rng.integers(0, cover.n_cells, size=10):
        lo, hi = model.box(int(cell), 0)
        clo, chi = cover.cell_box(int(cell))
        pts = rng.uniform(clo, chi, size=(100, 2))
        ends = integrate_batch(sys, pts, [0.0])
        assert np.all(ends >= lo - 1e-12) and np.all(ends <= hi + 1e-12)


def test_reverse_radius_expands_for_contracting_field():
    # x' = -x contracts forward, so the reverse boxes must be wider
    field = constant_growth_field(1, 1, lambda x, u: -x, [[-1.0]])
    sys = SampledSystem(field, tau=0.5)
    r_fwd = propagated_radius(sys, [0.0], np.array([1.0]))
    r_rev = propagated_radius(sys, [0.0], np.array([1.0]), reverse=True)
    assert r_fwd[0] == pytest.approx(np.exp(-0.5))
    assert r_rev[0] == pytest.approx(np.exp(0.5))


def test_pred_mode_radius_covers_forward_slop():
    cover = GridCover([0.0], [1.0], [8])
    sys = SampledSystem(stationary(), tau=1.0)
    model = EnclosureModel(sys, cover, [[0.0]], "pred")
    # stationary field: pred radius = (eta/2 forward slop) + eta/2 = eta
    eta = 0.125
    assert model.radii[0][0] == pytest.approx(eta, rel=1e-12)
    lo, hi = model.box(4, 0)
    assert hi[0] - lo[0] == pytest.approx(2 * eta, rel=1e-12)
