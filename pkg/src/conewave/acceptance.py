"""Acceptance suite: ten numbered checks with fixed tolerances.

Each ``criterion_*`` function returns a :class:`CriterionResult` holding the
measured values next to the tolerances that gate it.  ``run_suite`` runs a
selection and is shared by the ``verify`` command and the test suite.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

from .cone_ops import (BoundaryDensity, ConeParams, DirichletData, e_kernel,
                       layer_mass_fraction, outside_mask, t_transform, v_operator)
from .projection import calibrate_gm, cone_project_indicator, g_m_quadrature
from .solver import (axis_multiplier, dirichlet_matrix, general_solution,
                     interior_residual, k_kernel, oblique_variant, poisson_constant,
                     poisson_convolution, poisson_kernel, residue_check,
                     solve_dirichlet_cone, solve_dirichlet_halfspace)
from .spectral_core import (FREQUENCY, SPACE, Grid, SampledField, dft_forward,
                            dft_inverse, relative_l2)
from .symbol_lab import (ProblemOrder, catalog_halfspace_laplacian,
                         catalog_synthetic_lorentz, factorization_residual,
                         q_weight, tube_analyticity_probe)

logger = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: Dict[str, float] = field(default_factory=dict)
    tolerance: Dict[str, float] = field(default_factory=dict)
    runtime: float = 0.0
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.number:2d} {self.name}: {vals} ({self.runtime:.1f}s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.3e}"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.runtime = time.perf_counter() - t0
        if "runtime_limit" in res.tolerance:
            res.measured["runtime"] = res.runtime
            res.passed = res.passed and res.runtime <= res.tolerance["runtime_limit"]
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# --------------------------------------------------------------------------
# test fields
# --------------------------------------------------------------------------

def smooth_bump(X, Y, x0, y0, r):
    """Compactly supported ``exp(-1 / (1 - rho^2))`` bump of radius ``r``."""
    rr = ((X - x0) ** 2 + (Y - y0) ** 2) / r ** 2
    out = np.zeros(np.broadcast(X, Y).shape)
    inside = rr < 1
    out[inside] = np.exp(-1.0 / (1.0 - rr[inside]))
    return out


def bumps_off_interface(X, Y, rng, a=1.0, count=10):
    """Random bumps each lying wholly inside or wholly outside the cone."""
    u = np.zeros(np.broadcast(X, Y).shape)
    k = 0
    while k < count:
        cx, cy, r = rng.uniform(-2.5, 2.5), rng.uniform(-1.5, 3.0), rng.uniform(0.4, 0.8)
        dist = (cy - a * abs(cx)) / np.sqrt(1 + a * a)
        if abs(dist) < r:
            continue
        u = u + rng.normal() * smooth_bump(X, Y, cx, cy, r)
        k += 1
    return u


def _gaussian_data(grid: Grid, width: float = 1.0, shift: float = 0.0) -> DirichletData:
    b = grid.boundary()
    return DirichletData(b, np.exp(-((b.x - shift) / width) ** 2))


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------

@_timed
def criterion_residue() -> CriterionResult:
    """Truncated integral of ``1/(xi + i)`` over ``[-1e6, 1e6]`` against ``-pi i``."""
    val = residue_check(1.0, 1e6)
    err = abs(val + 1j * np.pi)
    return CriterionResult(1, "residue anchor", err <= 3e-6,
                           {"abs_error": err}, {"abs_error": 3e-6, "runtime_limit": 1.0})


@_timed
def criterion_poisson(c_m_scale: float = 1.0, L: float = 10.0,
                      sizes: Sequence[int] = (256, 512)) -> CriterionResult:
    """Spectral half-space solve against direct Poisson-kernel quadrature.

    ``c_m_scale`` multiplies the kernel constant of the direct route and
    exists for mutation testing.
    """
    c2 = poisson_constant(2) * c_m_scale
    errs = []
    for N in sizes:
        grid = Grid(2, L, N)
        g = _gaussian_data(grid)
        spec = solve_dirichlet_halfspace(g, grid).values
        direct = poisson_convolution(g, grid, periodic=True, c2=c2).values
        step = N // sizes[0]
        ix = np.arange(0, N, step)
        iy = np.arange(grid.origin + step, N, step)
        errs.append(relative_l2(spec[np.ix_(ix, iy)], direct[np.ix_(ix, iy)]))
    norm_err = 0.0
    for xm in (0.1, 1.0, 5.0):
        val = integrate.quad(lambda t: c_m_scale * poisson_kernel(t, xm, 2), -np.inf, np.inf,
                             epsabs=1e-13, epsrel=1e-12)[0]
        norm_err = max(norm_err, abs(val - 1.0))
    ratio = errs[0] / errs[1] if errs[1] > 0 else np.inf
    passed = errs[0] <= 1e-3 and ratio >= 2.0 and norm_err <= 1e-8
    return CriterionResult(2, "poisson baseline", passed,
                           {"rel_l2_N256": errs[0], "rel_l2_N512": errs[1], "improvement": ratio,
                            "normalisation_error": norm_err},
                           {"rel_l2_N256": 1e-3, "improvement": 2.0, "normalisation_error": 1e-8,
                            "runtime_limit": 30.0})


@_timed
def criterion_transforms(seed: int = 1) -> CriterionResult:
    """Inverse pairs, isometry and the ``a = 0`` identity of the flattening maps."""
    rng = np.random.default_rng(seed)
    worst_inv = 0.0
    worst_iso = 0.0
    ident = True
    for m, N in ((2, 64), (3, 16)):
        grid = Grid(m, 8.0, N)
        vals = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
        u = SampledField(grid, vals, SPACE)
        s = SampledField(grid, vals, FREQUENCY)
        for a in (0.5, 1.0, 2.0):
            cone = ConeParams(a, m)
            tu = t_transform(u, cone, 1)
            worst_inv = max(worst_inv, relative_l2(t_transform(tu, cone, -1).values, vals),
                            relative_l2(t_transform(t_transform(u, cone, -1), cone, 1).values, vals),
                            relative_l2(v_operator(v_operator(s, cone, -1), cone, 1).values, vals))
            worst_iso = max(worst_iso, abs(tu.l2_norm() - u.l2_norm()) / u.l2_norm(),
                            abs(v_operator(s, cone, 1).l2_norm() - s.l2_norm()) / s.l2_norm())
        zero = ConeParams(0.0, m)
        ident = ident and np.array_equal(t_transform(u, zero, 1).values, vals) \
            and np.array_equal(v_operator(s, zero, 1).values, vals)
    passed = worst_inv <= 1e-12 and worst_iso <= 1e-12 and ident
    return CriterionResult(3, "transform exactness", passed,
                           {"inverse_error": worst_inv, "isometry_error": worst_iso,
                            "a0_identity_exact": ident},
                           {"inverse_error": 1e-12, "isometry_error": 1e-12})


@_timed
def criterion_factorization(step: float = 1e-2) -> CriterionResult:
    """Catalog product residuals and Cauchy-Riemann defects under one step halving."""
    resid = 0.0
    for m, N in ((2, 64), (3, 16)):
        sym, pair = catalog_halfspace_laplacian(m)
        resid = max(resid, factorization_residual(pair, sym, Grid(m, 10.0, N))[0])
        sym, pair = catalog_synthetic_lorentz(1.0, 1.0, m)
        resid = max(resid, factorization_residual(pair, sym, Grid(m, 10.0, N))[0])
    rng = np.random.default_rng(3)
    # half-space factor in m = 3 is continued in xi_m and is non-polynomial in xi'
    _, hp3 = catalog_halfspace_laplacian(3)
    samples = [(rng.uniform(0.5, 2.0, 3), np.array([0.0, 0.0, rng.uniform(0.2, 1.0)])) for _ in range(8)]
    cr1, _ = tube_analyticity_probe(hp3.plus, ConeParams(0.0, 3), samples, step)
    cr2, _ = tube_analyticity_probe(hp3.plus, ConeParams(0.0, 3), samples, step / 2)
    ratio = cr1 / cr2 if cr2 > 0 else np.inf
    _, lz = catalog_synthetic_lorentz(1.0, 1.0, 2)
    lsamp = [(rng.normal(size=2), np.array([rng.uniform(-0.3, 0.3), 1.0])) for _ in range(8)]
    lz1, _ = tube_analyticity_probe(lz.plus, ConeParams(1.0, 2), lsamp, step)
    lz2, _ = tube_analyticity_probe(lz.plus, ConeParams(1.0, 2), lsamp, step / 2)
    # a quadratic factor has no third derivative: its defect is rounding only
    lorentz_ok = max(lz1, lz2) <= 1e-10
    second_order = 3.0 <= ratio <= 5.0
    passed = resid <= 1e-12 and second_order and lorentz_ok
    return CriterionResult(4, "factorization identities", passed,
                           {"residual": resid, "cr_step": cr1, "cr_half_step": cr2,
                            "halving_ratio": ratio, "lorentz_cr": max(lz1, lz2)},
                           {"residual": 1e-12, "halving_ratio_min": 3.0, "halving_ratio_max": 5.0,
                            "lorentz_cr": 1e-10})


def gm_error(N: int, L: float, tau: float, a: float = 1.0, seed: int = 0) -> float:
    """Relative error of the calibrated kernel-sum projection against the indicator route."""
    grid = Grid(2, L, N)
    cone = ConeParams(a, 2)
    X, Y = grid.nodes(SPACE)
    ref = dft_forward(SampledField(grid, smooth_bump(X, Y, 0.0, 1.5, 1.0), SPACE))
    gamma = calibrate_gm(ref, cone, tau)
    u = bumps_off_interface(X, Y, np.random.default_rng(seed), a)
    spec = dft_forward(SampledField(grid, u, SPACE))
    exact, _ = cone_project_indicator(spec, cone)
    approx = g_m_quadrature(spec, cone, tau, gamma=gamma).f_plus
    return relative_l2(approx.values, exact.values)


@_timed
def criterion_projection(seed: int = 0) -> CriterionResult:
    """Indicator projection laws and the kernel-sum cross-check."""
    grid = Grid(2, 10.0, 64)
    cone = ConeParams(1.0, 2)
    rng = np.random.default_rng(seed)
    spec = SampledField(grid, rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape), FREQUENCY)
    plus, minus = cone_project_indicator(spec, cone)
    comp = float(np.max(np.abs(plus.values + minus.values - spec.values)) / np.max(np.abs(spec.values)))
    pp, _ = cone_project_indicator(plus, cone)
    pm, _ = cone_project_indicator(minus, cone)
    idem = relative_l2(pp.values, plus.values)
    annih = float(np.linalg.norm(pm.values) / np.linalg.norm(minus.values))
    up = dft_inverse(plus).values
    leak = float(np.linalg.norm(up[outside_mask(grid, cone)]) / np.linalg.norm(up))
    e1 = gm_error(64, 10.0, np.pi / 10.0, seed=seed)
    e2 = gm_error(128, 20.0, np.pi / 20.0, seed=seed)
    ratio = e1 / e2
    passed = (comp <= 4 * np.finfo(float).eps and idem <= 1e-12 and annih <= 1e-12
              and leak <= 1e-10 and e1 <= 1e-1 and ratio >= 1.5)
    return CriterionResult(5, "projection laws", passed,
                           {"complementarity": comp, "idempotence": idem, "annihilation": annih,
                            "leakage": leak, "gm_error_N64": e1, "gm_error_N128": e2,
                            "gm_reduction": ratio},
                           {"complementarity": 4 * np.finfo(float).eps, "idempotence": 1e-12,
                            "annihilation": 1e-12, "leakage": 1e-10, "gm_error_N64": 1e-1,
                            "gm_reduction": 1.5})


def e_kernel_by_quadrature(xi_p: float, xi_m: float, a: float, eps: float) -> complex:
    """``int exp(i y xi') exp(-i a |y| xi_m - eps |y|) dy`` by oscillatory quadrature."""
    total = 0j
    # 2 int_0^inf cos(y xi') exp(-i a xi_m y) exp(-eps y) dy, split into two exponentials
    for omega in (xi_p - a * xi_m, -xi_p - a * xi_m):
        damp = lambda y: np.exp(-eps * y)
        if omega == 0:
            total += integrate.quad(damp, 0, np.inf, epsabs=1e-14, epsrel=1e-12)[0]
            continue
        w = abs(omega)
        with warnings.catch_warnings():
            # QAWF flags cycles already below epsabs; the result is unaffected
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            c = integrate.quad(damp, 0, np.inf, weight="cos", wvar=w, epsabs=1e-14, limlst=200)[0]
            s = integrate.quad(damp, 0, np.inf, weight="sin", wvar=w, epsabs=1e-14, limlst=200)[0]
        total += c + 1j * np.sign(omega) * s
    return complex(total)


@_timed
def criterion_kernels() -> CriterionResult:
    """Closed-form ``E_a`` against its defining integral; the ``K_a(1, 0)`` limit."""
    grid = Grid(2, 10.0, 64)
    eps = grid.dxi / 10.0
    worst = 0.0
    pts = [(0.0, 1.0), (0.7, 0.3), (-1.3, 2.1), (grid.xi[40], grid.xi[20]), (2.5, -0.4)]
    for a in (0.5, 1.0):
        for xp, xm in pts:
            cf = complex(e_kernel(xp, xm, a, eps))
            qv = e_kernel_by_quadrature(xp, xm, a, eps)
            worst = max(worst, abs(cf - qv) / max(1.0, abs(qv)))
    _, hp = catalog_halfspace_laplacian(2)
    e0 = 1e-3
    k1 = k_kernel(1.0, 0.0, hp, 1.0, e0)
    k2 = k_kernel(1.0, 0.0, hp, 1.0, e0 / 2)
    rich = 2 * k2 - k1
    kerr = abs(rich + 4j * np.pi) / (4 * np.pi)
    passed = worst <= 1e-6 and kerr <= 1e-3
    return CriterionResult(6, "kernel oracles", passed,
                           {"e_kernel_error": worst, "k_limit_rel_error": kerr},
                           {"e_kernel_error": 1e-6, "k_limit_rel_error": 1e-3})


@_timed
def criterion_support(seed: int = 7, trials: int = 3) -> CriterionResult:
    """Flattened ``F^-1(A_+ u~_+ - Q f_+)`` concentrates on the hyperplane."""
    grid = Grid(2, 10.0, 128)
    cone = ConeParams(1.0, 2)
    sym, pair = catalog_synthetic_lorentz(1.0, 1.0)
    order = ProblemOrder.from_s_kappa(1.0, pair.kappa)
    rng = np.random.default_rng(seed)
    X, Y = grid.nodes(SPACE)
    xi = grid.nodes(FREQUENCY)
    worst = 1.0
    for _ in range(trials):
        lf = np.zeros(grid.shape)
        for _ in range(4):
            c = rng.uniform(-4, 4, 2)
            lf = lf + rng.normal() * np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2))
        lfs = dft_forward(SampledField(grid, lf, SPACE))
        b = grid.boundary()
        dens = DirichletData(b, rng.normal() * np.exp(-(b.x - rng.uniform(-2, 2)) ** 2))
        sol = general_solution(pair, cone, order, lfs, [BoundaryDensity(1, dens)])
        diff = pair.plus(*xi) * sol.spectrum.values - q_weight(order.n).on_grid(grid) * sol.f_plus.values
        flat = t_transform(dft_inverse(SampledField(grid, diff, FREQUENCY)), cone, 1)
        worst = min(worst, layer_mass_fraction(flat, 1))
    return CriterionResult(7, "general-solution support", worst >= 0.999,
                           {"layer_mass_fraction": worst}, {"layer_mass_fraction_min": 0.999})


@_timed
def criterion_cone_dirichlet() -> CriterionResult:
    """Lorentz pair, ``a = 1``: leakage, trace defect and interior residual decay."""
    _, pair = catalog_synthetic_lorentz(1.0, 1.0)
    cone = ConeParams(1.0, 2)
    res = {}
    out = {}
    for N in (64, 128):
        grid = Grid(2, 10.0, N)
        sol = solve_dirichlet_cone(pair, cone, _gaussian_data(grid), grid)
        res[N] = interior_residual(pair, sol.u_plus, cone)
        out[N] = sol
    ratio = res[64] / res[128]
    s = out[128]
    passed = s.leakage <= 1e-6 and s.trace_defect <= 1e-3 and ratio >= 2.0
    return CriterionResult(8, "cone dirichlet", passed,
                           {"leakage": s.leakage, "trace_defect": s.trace_defect,
                            "residual_N64": res[64], "residual_N128": res[128],
                            "residual_reduction": ratio},
                           {"leakage": 1e-6, "trace_defect": 1e-3, "residual_reduction": 2.0,
                            "runtime_limit": 180.0})


@_timed
def criterion_degeneration(N: int = 128) -> CriterionResult:
    """Cone pipeline at ``a = 0`` against ``u~_+ = 2i g~/(xi_m + i|xi'|)``."""
    _, pair = catalog_halfspace_laplacian(2)
    cone = ConeParams(0.0, 2)
    grid = Grid(2, 10.0, N)
    g = _gaussian_data(grid, shift=0.4)
    sol = solve_dirichlet_cone(pair, cone, g, grid, method="spectral", trace="continuum")
    xp, xm = grid.nodes(FREQUENCY)
    gh = g.to_frequency().values[:, None]
    keep = np.broadcast_to(~((xp == 0) & (xm == 0)), grid.shape)
    with np.errstate(all="ignore"):
        closed = 2j * gh / (xm + 1j * np.abs(xp))
    err = float(np.max(np.abs(sol.general.spectrum.values - closed)[keep]))
    return CriterionResult(9, "a=0 degeneration", err <= 1e-10,
                           {"max_pointwise_error": err}, {"max_pointwise_error": 1e-10})


@_timed
def criterion_oblique(N: int = 64) -> CriterionResult:
    """Oblique ``k = 1`` system against principal-value quadrature; density parity."""
    _, pair = catalog_halfspace_laplacian(2)
    cone = ConeParams(0.0, 2)
    grid = Grid(2, 10.0, N)
    g = _gaussian_data(grid)
    sol = oblique_variant(pair, cone, 1, g, grid)
    quad = dirichlet_matrix(pair, cone, grid, trace="continuum", extra=axis_multiplier(1, 2),
                            principal_value=True).matrix
    rel = relative_l2(sol.system.matrix, quad)
    c = sol.density.values
    paired = c[1:]
    parity = float(np.max(np.abs(paired + paired[::-1])) / np.max(np.abs(c)))
    passed = rel <= 1e-2 and parity <= 1e-10
    return CriterionResult(10, "oblique variant", passed,
                           {"matrix_rel_error": rel, "parity_defect": parity,
                            "null_modes": sol.info["null_modes"]},
                           {"matrix_rel_error": 1e-2, "parity_defect": 1e-10})


CRITERIA: Dict[int, Callable[..., CriterionResult]] = {
    1: criterion_residue,
    2: criterion_poisson,
    3: criterion_transforms,
    4: criterion_factorization,
    5: criterion_projection,
    6: criterion_kernels,
    7: criterion_support,
    8: criterion_cone_dirichlet,
    9: criterion_degeneration,
    10: criterion_oblique,
}


def run_suite(numbers: Optional[Sequence[int]] = None, mutations: Optional[dict] = None,
              echo: Optional[Callable[[str], None]] = None) -> List[CriterionResult]:
    """Run the selected criteria (all by default), echoing one line per result."""
    mutations = mutations or {}
    results = []
    for n in numbers or sorted(CRITERIA):
        fn = CRITERIA[n]
        kwargs = {}
        if n == 2 and "c_m_scale" in mutations:
            kwargs["c_m_scale"] = float(mutations["c_m_scale"])
        res = fn(**kwargs)
        logger.info(res.line())
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
