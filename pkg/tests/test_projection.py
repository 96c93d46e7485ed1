import numpy as np
import pytest

from conewave.acceptance import gm_error
from conewave.cone_ops import ConeParams, outside_mask
from conewave.errors import ParameterError, ResourceError, StructuralError
from conewave.projection import (calibrate_gm, cone_project_indicator, g_m_quadrature,
                                 gm_constant_theory)
from conewave.spectral_core import (FREQUENCY, Grid, SampledField, dft_forward, dft_inverse,
                                    relative_l2, sample)


def random_spectrum(grid, rng):
    return dft_forward(SampledField(grid, rng.standard_normal(grid.shape)))


def test_zero_spectrum():
    g = Grid(2, 5.0, 32)
    z = SampledField(g, np.zeros(g.shape), FREQUENCY)
    p, m = cone_project_indicator(z, ConeParams(1.0))
    assert np.all(p.values == 0) and np.all(m.values == 0)
    assert np.all(g_m_quadrature(z, ConeParams(1.0), 0.3).f_plus.values == 0)


def test_halfspace_cut_is_heaviside():
    g = Grid(2, 5.0, 64)
    u = sample(g, lambda x, y: np.exp(-x ** 2 - (y - 0.3) ** 2))
    p, _ = cone_project_indicator(dft_forward(u), ConeParams(0.0))
    cut = np.where(g.x[None, :] >= 0, u.values, 0.0)
    assert np.max(np.abs(dft_inverse(p).values - cut)) <= 1e-13


def test_projection_laws(rng):
    g = Grid(2, 5.0, 64)
    cone = ConeParams(1.0)
    s = random_spectrum(g, rng)
    p, m = cone_project_indicator(s, cone)
    # exact up to the last-bit rounding of (s - p) + p
    assert np.max(np.abs(p.values + m.values - s.values)) <= 4 * np.finfo(float).eps * np.max(np.abs(s.values))
    pp, pm = cone_project_indicator(p, cone)
    assert relative_l2(pp.values, p.values) <= 1e-12
    assert np.linalg.norm(cone_project_indicator(m, cone)[0].values) <= 1e-12 * np.linalg.norm(s.values)
    u = dft_inverse(p).values
    assert np.linalg.norm(u[outside_mask(g, cone)]) <= 1e-10 * np.linalg.norm(u)


def test_projection_input_checks():
    g = Grid(2, 5.0, 16)
    with pytest.raises(StructuralError):
        cone_project_indicator(SampledField(g, np.zeros(g.shape)), ConeParams(1.0))
    with pytest.raises(StructuralError):
        cone_project_indicator(SampledField(Grid(3, 5.0, 8), np.zeros((8,) * 3), FREQUENCY), ConeParams(1.0))


def test_quadrature_input_checks():
    g = Grid(2, 5.0, 16)
    z = SampledField(g, np.zeros(g.shape), FREQUENCY)
    with pytest.raises(ParameterError):
        g_m_quadrature(z, ConeParams(1.0), 0.0)
    with pytest.raises(ParameterError):
        g_m_quadrature(z, ConeParams(0.0), 0.1)
    big = Grid(2, 5.0, 256)
    with pytest.raises(ResourceError):
        g_m_quadrature(SampledField(big, np.zeros(big.shape), FREQUENCY), ConeParams(1.0), 0.1)


def test_calibration_is_least_squares(rng):
    g = Grid(2, 10.0, 32)
    cone = ConeParams(1.0)
    ref = cone_project_indicator(random_spectrum(g, rng), cone)[0]
    gam = calibrate_gm(ref, cone, 0.5)
    res = g_m_quadrature(ref, cone, 0.5, gamma=gam)
    e0 = np.linalg.norm(res.f_plus.values - ref.values)
    for d in (1.01, 0.99):
        assert np.linalg.norm(d * res.f_plus.values - ref.values) >= e0
    assert gm_constant_theory(cone) > 0


def test_quadrature_fixes_cone_supported_reference():
    # cone-supported Gaussian bump, N=64, tau=h, calibrated on itself
    g = Grid(2, 10.0, 64)
    cone = ConeParams(1.0)
    ref = dft_forward(sample(g, lambda x, y: np.exp(-(x ** 2 + (y - 4.0) ** 2)) * (y >= np.abs(x))))
    res = g_m_quadrature(ref, cone, g.h, reference=ref)
    assert relative_l2(res.f_plus.values, ref.values) <= 5e-2


def test_quadrature_route_against_indicator_route():
    # the kernel sum runs over frequency nodes, so its mesh is dxi = pi / L
    coarse = gm_error(64, 10.0, np.pi / 10.0)
    fine = gm_error(128, 20.0, np.pi / 20.0)
    assert coarse <= 1e-1
    assert coarse / fine >= 1.5
