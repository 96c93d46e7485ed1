import numpy as np
import pytest
from scipy import integrate

from conewave import solver as S
from conewave.acceptance import _gaussian_data, smooth_bump
from conewave.cone_ops import (BoundaryDensity, ConeParams, DirichletData, boundary_trace,
                               v_operator)
from conewave.errors import (DivergenceError, DomainError, IllConditionedError, ParameterError,
                             SingularNodeError, StructuralError)
from conewave.spectral_core import (FREQUENCY, SPACE, Grid, SampledField, dft_forward,
                                    dft_inverse, relative_l2, sample)
from conewave.symbol_lab import (EllipticSymbol, ProblemOrder, WaveFactorizationPair,
                                 catalog_halfspace_laplacian, catalog_synthetic_lorentz)

HALF_SYM, HALF = catalog_halfspace_laplacian()
LOR_SYM, LOR = catalog_synthetic_lorentz(1.0, 1.0)
FLAT = ConeParams(0.0)
CONE = ConeParams(1.0)


def rho_grid(grid):
    xi = grid.nodes(FREQUENCY)
    return np.abs(xi[0]), xi[1]


# ---------------------------------------------------------------- operators

def test_apply_operator_examples():
    g = Grid(2, 10.0, 128)
    u = sample(g, lambda x, y: np.exp(-(x ** 2 + y ** 2) / 2))
    one = EllipticSymbol(lambda a, b: 1 + 0 * a * b, 0.0)
    assert relative_l2(S.apply_operator(one, u).values, u.values) <= 1e-13
    lap = S.apply_operator(HALF_SYM, u)
    assert abs(lap.values[g.origin, g.origin] - 2.0) <= 1e-8
    z = SampledField(g, np.zeros(g.shape))
    assert np.all(np.abs(S.apply_operator(HALF_SYM, z).values) == 0)


# ---------------------------------------------------------------- general solution

def test_general_solution_zero_inputs():
    g = Grid(2, 10.0, 32)
    order = ProblemOrder.from_s_kappa(1.0, 2.0)
    sol = S.general_solution(LOR, CONE, order, None, grid=g)
    assert np.all(sol.spectrum.values == 0)
    assert sol.spectrum.smoothness_tag == 1.0


def test_general_solution_halfspace_layer_closed_form():
    g = Grid(2, 10.0, 64)
    c = DirichletData(g.boundary(), np.exp(-g.x ** 2))
    order = ProblemOrder.from_s_kappa(0.0, 1.0)
    sol = S.general_solution(HALF, FLAT, order, None, [BoundaryDensity(1, c)], grid=g)
    rho, xm = rho_grid(g)
    with np.errstate(all="ignore"):
        exact = c.to_frequency().values[:, None] / (xm + 1j * rho)
    live = np.isfinite(exact)
    assert (~live).sum() == 1
    assert np.max(np.abs(sol.spectrum.values[live] - exact[live])) <= 1e-12 * np.max(np.abs(exact[live]))
    assert sol.fill.filled == 1


def test_general_solution_checks_inputs():
    g = Grid(2, 10.0, 16)
    with pytest.raises(StructuralError):
        S.general_solution(LOR, CONE, ProblemOrder.from_s_kappa(0.0, 1.0), None, grid=g)
    with pytest.raises(StructuralError):
        S.general_solution(LOR, CONE, ProblemOrder.from_s_kappa(1.0, 2.0), None)
    lf = SampledField(g, np.zeros(g.shape))
    with pytest.raises(StructuralError):
        S.general_solution(LOR, CONE, ProblemOrder.from_s_kappa(1.0, 2.0), lf)


def _lorentz_general(N=128, densities=()):
    g = Grid(2, 10.0, N)
    X, Y = np.meshgrid(g.x, g.x, indexing="ij")
    lf = dft_forward(SampledField(g, smooth_bump(X, Y, 0.0, 4.0, 2.0)))
    order = ProblemOrder.from_s_kappa(1.0, 2.0)
    return g, lf, S.general_solution(LOR, CONE, order, lf, list(densities), grid=g)


def test_general_solution_split_identity():
    g, lf, sol = _lorentz_general()
    um = S.minus_remainder(sol)
    au = S.apply_operator(LOR_SYM, sol.spectrum)
    assert relative_l2(au.values + um.values, lf.values) <= 1e-8
    dens = [BoundaryDensity(1, DirichletData(g.boundary(), np.exp(-(g.x - 1) ** 2)))]
    _, _, sol2 = _lorentz_general(densities=dens)
    um2 = S.minus_remainder(sol2)
    au2 = S.apply_operator(LOR_SYM, sol2.spectrum)
    assert relative_l2(au2.values + um2.values, lf.values) <= 1e-8


def test_general_solution_support_in_cone():
    _, _, sol = _lorentz_general()
    assert S.support_leakage(sol.space(), CONE) <= 1e-6


def test_general_solution_quadrature_projector():
    g = Grid(2, 10.0, 32)
    lf = dft_forward(sample(g, lambda x, y: np.exp(-x ** 2 - (y - 3) ** 2)))
    order = ProblemOrder.from_s_kappa(1.0, 2.0)
    sol = S.general_solution(LOR, CONE, order, lf, projector="gm-quadrature", tau=0.3)
    assert sol.projector == "gm-quadrature" and np.all(np.isfinite(sol.spectrum.values))
    with pytest.raises(ParameterError):
        S.general_solution(LOR, CONE, order, lf, projector="gm-quadrature")
    with pytest.raises(ParameterError):
        S.general_solution(LOR, CONE, order, lf, projector="nope")


def test_singular_node_without_fill():
    g = Grid(2, 10.0, 16)
    with pytest.raises(SingularNodeError):
        S.sample_inverse_factor(HALF.plus, g, fill="none")
    inv, rep = S.sample_inverse_factor(HALF.plus, g)
    assert rep.filled == 1 and np.all(np.isfinite(inv))


# ---------------------------------------------------------------- residue anchor

def test_residue_check_examples():
    v = S.residue_check(1.0, 1e6)
    assert abs(v - (-np.pi * 1j + 2e-6j)) <= 1e-9
    assert abs(v + np.pi * 1j) <= 3e-6
    assert v.imag < 0 and abs(v.real) <= 1e-10
    assert abs(S.residue_check(5.0, 1e6, tail=True) - S.residue_check(1.0, 1e6, tail=True)) <= 1e-6
    assert abs(S.residue_check(1.0, 1e6, tail=True) + np.pi * 1j) <= 1e-10
    with pytest.raises(ParameterError):
        S.residue_check(0.0, 10.0)


def test_contour_trace_of_halfspace_factor():
    for rho in (0.3, 1.0, 7.0):
        assert abs(S.contour_trace(lambda z: 1.0 / (z + 1j * rho)) + 0.5j) <= 1e-12


# ---------------------------------------------------------------- boundary system

def test_halfspace_matrix_is_scaled_identity():
    g = Grid(2, 10.0, 32)
    K = S.dirichlet_matrix(HALF, FLAT, g, trace="continuum").matrix
    assert np.max(np.abs(K - (-0.5j) * np.eye(g.N))) <= 1e-12


def test_halfspace_grid_trace_structure():
    g = Grid(2, 10.0, 64)
    K = S.dirichlet_matrix(HALF, FLAT, g).matrix
    d = np.diag(K)
    assert np.all(K - np.diag(d) == 0)
    err = np.abs(d + 0.5j)
    right = err[g.origin + 1:]
    # trapezoid error of the node sum is largest at the first nonzero |xi'|
    assert right[0] <= 2e-3 and np.max(right[1:]) <= 1e-5


def test_matrix_linearity(rng):
    g = Grid(2, 10.0, 32)
    sysm = S.dirichlet_matrix(LOR, CONE, g)
    c1 = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
    c2 = rng.standard_normal(g.N)
    lhs = sysm.apply(c1 + c2)
    assert np.max(np.abs(lhs - sysm.apply(c1) - sysm.apply(c2))) <= 1e-12 * np.max(np.abs(lhs))


def test_matrix_columns_follow_the_pipeline():
    g = Grid(2, 10.0, 32)
    sysm = S.dirichlet_matrix(LOR, CONE, g)
    inv, _ = S.sample_inverse_factor(LOR.plus, g)
    j = 11
    e = np.zeros(g.shape, dtype=complex)
    e[j, :] = 1.0
    col = boundary_trace(v_operator(SampledField(g, inv * v_operator(SampledField(g, e, FREQUENCY),
                                                                     CONE, -1).values, FREQUENCY), CONE, 1))
    assert np.max(np.abs(col.values - sysm.matrix[:, j])) <= 1e-13


def test_matrix_parameter_checks():
    g = Grid(2, 10.0, 16)
    with pytest.raises(DomainError):
        S.dirichlet_matrix(LOR, CONE, g, trace="continuum")
    with pytest.raises(ParameterError):
        S.dirichlet_matrix(LOR, CONE, g, trace="other")
    with pytest.raises(ParameterError):
        S.dirichlet_matrix(LOR, CONE, g, unknown="other")


def test_ill_conditioned_system_refused():
    g = Grid(2, 10.0, 16)
    K = np.eye(g.N, dtype=complex)
    K[0, 0] = 1e-14
    sysm = S.DirichletSystem(K, g, "surface", "grid", 0.0)
    with pytest.raises(IllConditionedError):
        S._solve_system(sysm, np.ones(g.N))


# ---------------------------------------------------------------- K kernel

def test_k_kernel_residue_value():
    # closed contour through the upper pole i eps gives -4 pi i / (1 + eps)
    for eps in (1e-3, 5e-4):
        assert abs(S.k_kernel(1.0, 0.0, HALF, 1.0, eps) + 4j * np.pi / (1 + eps)) <= 1e-8


def test_k_kernel_routes_agree():
    for eta, xi in ((0.3, 0.0), (1.0, -2.0), (-2.5, 0.7)):
        a = S.k_kernel(eta, xi, LOR, 1.0, 1e-3)
        b = S.k_kernel_contour(eta, xi, LOR, 1.0, 1e-3)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(b))


def test_k_kernel_checks():
    bad = WaveFactorizationPair(lambda *x: 1.0 + 0j, lambda *x: 1.0, 0.0, 0.0, CONE)
    with pytest.raises(DivergenceError):
        S.k_kernel(1.0, 0.0, bad, 1.0, 1e-3)
    with pytest.raises(ParameterError):
        S.k_kernel(1.0, 0.0, HALF, 1.0, 0.0)
    with pytest.raises(StructuralError):
        S.k_kernel_contour(1.0, 0.0, HALF, 1.0)


def test_k_kernel_even_factor_gives_zero():
    even = WaveFactorizationPair(lambda e, t: t ** 2 + 1.0 + 0 * e, lambda *x: 1.0, 2.0, 2.0, CONE)
    assert abs(S.k_kernel(1.0, 0.0, even, 1.0, 1e-6)) <= 1e-6


def test_k_kernel_eps_robustness():
    eps = 1e-3
    k1 = S.k_kernel(1.0, 0.0, HALF, 1.0, eps)
    k2 = S.k_kernel(1.0, 0.0, HALF, 1.0, eps / 2)
    assert abs(k1 - k2) <= 1e-4


def test_k_kernel_matrix_against_grid_assembly():
    g = Grid(2, 10.0, 64)
    grid_form = S.dirichlet_matrix(LOR, CONE, g, unknown="hyperplane").matrix
    kern_form = S.k_kernel_matrix(LOR, CONE, g)
    assert relative_l2(kern_form, grid_form) <= 1e-2


# ---------------------------------------------------------------- cone Dirichlet solve

def test_zero_data_gives_zero_solution():
    g = Grid(2, 10.0, 32)
    zero = DirichletData(g.boundary(), np.zeros(g.N))
    for method in ("spectral", "collocation"):
        sol = S.solve_dirichlet_cone(LOR, CONE, zero, g, method=method)
        assert np.all(sol.density.values == 0) and np.all(sol.u_plus.values == 0)


def test_halfspace_density_and_closed_form():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g, shift=0.4)
    sol = S.solve_dirichlet_cone(HALF, FLAT, d, g, method="spectral", trace="continuum")
    gh = d.to_frequency().values
    assert np.max(np.abs(sol.density.values - 2j * gh)) <= 1e-12 * np.max(np.abs(gh))
    rho, xm = rho_grid(g)
    with np.errstate(all="ignore"):
        exact = 2j * gh[:, None] / (xm + 1j * rho)
    live = np.isfinite(exact)
    assert np.max(np.abs(sol.general.spectrum.values[live] - exact[live])) <= 1e-10


def test_cone_solution_postconditions():
    g = Grid(2, 10.0, 128)
    sol = S.solve_dirichlet_cone(LOR, CONE, _gaussian_data(g), g)
    assert sol.method == "collocation"
    assert sol.trace_defect <= 1e-3 and sol.leakage <= 1e-6


def test_spectral_closure_matches_data():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g)
    sol = S.solve_dirichlet_cone(LOR, CONE, d, g, method="spectral")
    assert sol.trace_defect <= 1e-10
    assert sol.info["node_sum_defect"] <= 1e-10


def test_surface_and_hyperplane_unknowns_are_related_by_v():
    g = Grid(2, 10.0, 32)
    d = _gaussian_data(g)
    s1 = S.solve_dirichlet_cone(LOR, CONE, d, g, method="spectral", unknown="surface")
    s2 = S.solve_dirichlet_cone(LOR, CONE, d, g, method="spectral", unknown="hyperplane")
    lift = v_operator(SampledField(g, np.broadcast_to(s1.density.values[:, None], g.shape), FREQUENCY), CONE, -1)
    inv, _ = S.sample_inverse_factor(LOR.plus, g)
    assert relative_l2(s1.general.spectrum.values, inv * lift.values) <= 1e-12
    assert relative_l2(s2.u_plus.values, dft_inverse(SampledField(
        g, inv * s2.density.values[:, None], FREQUENCY)).values) <= 1e-12


# ---------------------------------------------------------------- half-space baseline

def test_poisson_constant_and_kernel():
    assert np.isclose(S.poisson_constant(2), 1 / np.pi)
    assert np.isclose(S.poisson_constant(3), 1 / (2 * np.pi))
    assert np.isclose(S.poisson_kernel(0.0, 1.0), 1 / np.pi)
    for xm in (0.1, 1.0, 5.0):
        val = integrate.quad(lambda t: S.poisson_kernel(t, xm), -np.inf, np.inf, epsabs=1e-13)[0]
        assert abs(val - 1.0) <= 1e-8
    with pytest.raises(DomainError):
        S.poisson_kernel(0.0, 0.0)
    with pytest.raises(DomainError):
        S.poisson_kernel_periodic(0.0, -1.0, 10.0)


def test_point_mass_gives_poisson_kernel():
    g = Grid(2, 10.0, 256)
    v = np.zeros(g.N)
    v[g.origin] = 1 / g.h
    u = S.solve_dirichlet_halfspace(DirichletData(g.boundary(), v), g).values
    k = np.argmin(abs(g.x - 1.0))
    exact = S.poisson_kernel_periodic(g.x, g.x[k], g.L)
    assert relative_l2(u[:, k], exact) <= 1e-10


def test_halfspace_solve_matches_poisson_convolution():
    g = Grid(2, 10.0, 256)
    d = _gaussian_data(g)
    spec = S.solve_dirichlet_halfspace(d, g).values
    direct = S.poisson_convolution(d, g).values
    pos = slice(g.origin + 1, None)
    assert relative_l2(spec[:, pos], direct[:, pos]) <= 1e-3


def test_halfspace_solution_is_discretely_harmonic():
    res = []
    for N in (64, 128, 256):
        g = Grid(2, 10.0, N)
        u = S.solve_dirichlet_halfspace(DirichletData(g.boundary(), np.exp(-g.x ** 2)), g)
        res.append(S.interior_residual(HALF, u, FLAT))
    assert res[0] / res[1] >= 3.0 and res[1] / res[2] >= 3.0


# ---------------------------------------------------------------- potential reconstruction

def test_partial_kernel_against_quadrature():
    for xi_p, s in ((0.7, 0.5), (2.0, 1.3)):
        q = S.partial_inverse_xi_m(HALF, [xi_p], s)
        assert abs(q - HALF.partial_kernel((xi_p,), s)) <= 1e-10
        assert abs(HALF.partial_kernel((xi_p,), s) + 1j * np.exp(-s * xi_p)) <= 1e-15
        q = S.partial_inverse_xi_m(LOR, [xi_p], s)
        assert abs(q - LOR.partial_kernel((xi_p,), s)) <= 1e-10
    assert S.partial_inverse_xi_m(HALF, [1.0], -0.5) == 0


def test_reconstruct_zero_density():
    g = Grid(2, 10.0, 32)
    z = DirichletData(g.boundary(), np.zeros(g.N))
    for route in ("grid", "slice"):
        assert np.all(S.reconstruct_potential(HALF, z, g, route=route).values == 0)


def test_grid_route_is_the_full_inverse_transform():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g)
    inv, _ = S.sample_inverse_factor(HALF.plus, g)
    ref = dft_inverse(SampledField(g, inv * d.to_frequency().values[:, None], FREQUENCY))
    assert relative_l2(S.reconstruct_potential(HALF, d, g, route="grid").values, ref.values) <= 1e-12


def _halfspace_potential_error(route):
    # W = F^-1(A_+^-1) is -i times the Poisson kernel on x_m > 0
    g = Grid(2, 10.0, 256)
    d = _gaussian_data(g)
    u = S.reconstruct_potential(HALF, d, g, route=route).values
    direct = -1j * S.poisson_convolution(d, g).values
    pos = slice(g.origin + 1, None)
    return relative_l2(u[:, pos], direct[:, pos])


def test_slice_reconstruction_matches_poisson():
    assert _halfspace_potential_error("slice") <= 1e-3


def test_grid_reconstruction_matches_poisson():
    assert _halfspace_potential_error("grid") <= 1e-3


def test_slice_and_grid_routes_agree():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g)
    a = S.reconstruct_potential(HALF, d, g, route="slice").values
    b = S.reconstruct_potential(HALF, d, g, route="grid").values
    assert relative_l2(a, b) <= 1e-12


# ---------------------------------------------------------------- oblique variant

def test_oblique_zero_data():
    g = Grid(2, 10.0, 32)
    sol = S.oblique_variant(HALF, FLAT, 1, DirichletData(g.boundary(), np.zeros(g.N)), g)
    assert np.all(sol.density.values == 0)


def test_oblique_normal_axis_needs_principal_value():
    g = Grid(2, 10.0, 16)
    d = _gaussian_data(g)
    with pytest.raises(DivergenceError):
        S.oblique_variant(HALF, FLAT, 2, d, g, principal_value=False)
    with pytest.raises(StructuralError):
        S.oblique_variant(HALF, FLAT, 3, d, g)


def test_oblique_tangential_parity_and_null_mode():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g)   # even data
    sol = S.oblique_variant(HALF, FLAT, 1, d, g)
    c = sol.density.values
    o = g.origin
    assert np.max(np.abs(c[o + 1:] + c[o - 1:0:-1])) <= 1e-10 * np.max(np.abs(c))
    assert sol.info["null_modes"] == 1 and c[o] == 0


def test_oblique_tangential_continuum_route():
    g = Grid(2, 10.0, 64)
    d = _gaussian_data(g)
    a = S.dirichlet_matrix(HALF, FLAT, g, extra=S.axis_multiplier(1, 2), principal_value=True).matrix
    b = S.dirichlet_matrix(HALF, FLAT, g, trace="continuum", extra=S.axis_multiplier(1, 2),
                           principal_value=True).matrix
    assert relative_l2(a, b) <= 1e-2
    assert np.all(np.isfinite(S.oblique_variant(HALF, FLAT, 1, d, g).u_plus.values))


def test_oblique_normal_derivative_matches_data():
    # zero-mean data: the xi' = 0 mode is the compatibility condition of the Neumann problem
    g = Grid(2, 10.0, 256)
    data = DirichletData(g.boundary(), g.x * np.exp(-g.x ** 2))
    sol = S.oblique_variant(HALF, FLAT, 2, data, g)
    u = S.reconstruct_potential(HALF, sol.density, g, route="slice").values
    o, h = g.origin, g.h
    u0 = 2 * u[:, o]                     # the x_m = 0 slice holds the mean of the limits
    du = (-3 * u0 + 4 * u[:, o + 1] - u[:, o + 2]) / (2 * h)
    # xi_m <-> i d/dx_m and the trace is the mean of the one-sided limits
    assert relative_l2(0.5j * du, data.values) <= 1e-2
    assert sol.info["incompatible_fraction"] <= 1e-12
