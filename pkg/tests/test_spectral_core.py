import numpy as np
import pytest
from scipy import integrate

from conewave.errors import SingularNodeError, StructuralError
from conewave.spectral_core import (FREQUENCY, SPACE, Grid, Multiplier, SampledField,
                                    apply_multiplier, dft_axis, dft_forward, dft_inverse,
                                    relative_l2, sample, sobolev_norm)

# sqrt of int (1 + |xi|^2) exp(-|xi|^2) dxi over R^2, by scipy quad in polar form
SOBOLEV_S1_GAUSSIAN = 2.5066282746310002


def gaussian(grid, scale=0.5):
    return sample(grid, lambda *x: np.exp(-scale * sum(c ** 2 for c in x)))


def test_grid_invariants():
    g = Grid(2, 10.0, 64)
    assert np.isclose(g.h * g.dxi * g.N, 2 * np.pi)
    assert g.x[0] == -10.0 and np.isclose(g.x[1] - g.x[0], g.h)
    assert np.isclose(g.xi[0], -np.pi / g.h)
    assert g.x[g.origin] == 0.0 and g.xi[g.origin] == 0.0


@pytest.mark.parametrize("kw", [dict(m=2, L=1.0, N=7), dict(m=2, L=1.0, N=6), dict(m=4, L=1.0, N=8),
                                dict(m=2, L=0.0, N=8)])
def test_grid_rejects_bad_parameters(kw):
    with pytest.raises(StructuralError):
        Grid(**kw)


def test_field_shape_checked():
    with pytest.raises(StructuralError):
        SampledField(Grid(2, 1.0, 8), np.zeros((8, 4)))


def test_point_mass_has_flat_spectrum():
    g = Grid(2, 5.0, 32)
    v = np.zeros(g.shape)
    v[g.origin, g.origin] = 1.0 / g.h ** 2
    spec = dft_forward(SampledField(g, v))
    assert np.allclose(spec.values, 1.0, atol=1e-13)
    back = dft_inverse(SampledField(g, np.ones(g.shape), FREQUENCY))
    assert np.allclose(back.values, v, atol=1e-12)


def test_gaussian_transform_pair():
    g = Grid(2, 10.0, 256)
    spec = dft_forward(gaussian(g))
    xi = g.nodes(FREQUENCY)
    exact = 2 * np.pi * np.exp(-0.5 * (xi[0] ** 2 + xi[1] ** 2))
    assert relative_l2(spec.values, exact) <= 1e-10
    back = dft_inverse(SampledField(g, exact, FREQUENCY))
    assert relative_l2(back.values, gaussian(g).values) <= 1e-10


def test_zero_field():
    g = Grid(2, 3.0, 16)
    z = SampledField(g, np.zeros(g.shape))
    assert np.all(dft_forward(z).values == 0)
    assert np.all(dft_axis(z, [1]).values == 0)
    assert sobolev_norm(dft_forward(z), 1.0) == 0.0


def test_round_trip_random(rng):
    g = Grid(2, 4.0, 32)
    u = SampledField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
    assert relative_l2(dft_inverse(dft_forward(u)).values, u.values) <= 1e-12


def test_axis_composition(rng):
    g = Grid(3, 4.0, 16)
    u = SampledField(g, rng.standard_normal(g.shape))
    two_step = dft_axis(dft_axis(u, [3]), [1, 2])
    assert two_step.rep == FREQUENCY
    assert relative_l2(two_step.values, dft_forward(u).values) <= 1e-12


def test_separable_axis_transform():
    g = Grid(2, 10.0, 128)
    x = g.x
    u = SampledField(g, np.exp(-x[:, None] ** 2) * np.exp(-(x[None, :] - 1) ** 2 / 2))
    mixed = dft_axis(u, [2])
    assert mixed.reps == (SPACE, FREQUENCY)
    # int exp(i x xi) exp(-(x-1)^2/2) dx = sqrt(2 pi) exp(i xi) exp(-xi^2/2)
    xi = g.xi
    v = np.sqrt(2 * np.pi) * np.exp(1j * xi - xi ** 2 / 2)
    assert relative_l2(mixed.values, np.exp(-x[:, None] ** 2) * v[None, :]) <= 1e-10
    quad = integrate.quad(lambda t: np.cos(t * 0.7) * np.exp(-(t - 1) ** 2 / 2), -40, 40)[0] \
        + 1j * integrate.quad(lambda t: np.sin(t * 0.7) * np.exp(-(t - 1) ** 2 / 2), -40, 40)[0]
    assert abs(quad - np.sqrt(2 * np.pi) * np.exp(0.7j - 0.245)) <= 1e-10


def test_axis_errors():
    g = Grid(2, 1.0, 8)
    u = SampledField(g, np.zeros(g.shape))
    with pytest.raises(StructuralError):
        dft_axis(u, [1, 1])
    with pytest.raises(StructuralError):
        dft_axis(u, [3])
    with pytest.raises(StructuralError):
        dft_axis(dft_axis(u, [1]), [1])
    with pytest.raises(StructuralError):
        dft_inverse(u)


def test_laplacian_of_gaussian_at_origin():
    g = Grid(2, 10.0, 128)
    lap = Multiplier(lambda a, b: a ** 2 + b ** 2, 2.0)
    out = dft_inverse(apply_multiplier(dft_forward(gaussian(g)), lap))
    assert abs(out.values[g.origin, g.origin] - 2.0) / 2.0 <= 1e-8


def test_derivative_multiplier_matches_finite_differences():
    # xi <-> i d/dx, so -i xi_m is the x_m derivative
    g = Grid(2, 10.0, 256)
    u = gaussian(g)
    du = dft_inverse(apply_multiplier(dft_forward(u), Multiplier(lambda a, b: -1j * b + 0 * a, 1.0)))
    h = 1e-5
    x, y = np.meshgrid(g.x, g.x, indexing="ij")
    fd = (np.exp(-0.5 * (x ** 2 + (y + h) ** 2)) - np.exp(-0.5 * (x ** 2 + (y - h) ** 2))) / (2 * h)
    assert relative_l2(du.values, fd) <= 1e-6


def test_multiplier_identity_and_tag():
    g = Grid(2, 2.0, 16)
    spec = SampledField(g, np.ones(g.shape), FREQUENCY, smoothness_tag=3.0)
    out = apply_multiplier(spec, Multiplier(lambda a, b: 1 + 0 * a * b, 1.5))
    assert np.array_equal(out.values, spec.values)
    assert out.smoothness_tag == 1.5


def test_multiplier_singular_node_reported():
    g = Grid(2, 2.0, 16)
    spec = SampledField(g, np.ones(g.shape), FREQUENCY)
    with pytest.raises(SingularNodeError) as exc:
        apply_multiplier(spec, Multiplier(lambda a, b: 1.0 / (a ** 2 + b ** 2), -2.0))
    assert [g.origin, g.origin] in exc.value.nodes.tolist()


def test_parseval_and_sobolev_s1():
    g = Grid(2, 10.0, 128)
    u = gaussian(g)
    spec = dft_forward(u)
    assert abs(sobolev_norm(spec, 0.0) - u.l2_norm()) <= 1e-10 * u.l2_norm()
    assert abs(sobolev_norm(spec, 1.0) - SOBOLEV_S1_GAUSSIAN) / SOBOLEV_S1_GAUSSIAN <= 1e-8
