"""General solution, boundary closures and the half-space baseline.

Conventions (see ``spectral_core``): the plus factor's inverse is analytic in
the upper half plane of ``xi_m``, traces are computed from spectra as
``(2 pi)^-1 int (.) dxi_m`` and therefore return the mean of the one-sided
limits at a jump.  A solution ``u_+`` that vanishes outside the cone thus has
trace equal to half its interior limit.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from math import gamma as gamma_fn
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import integrate, ndimage

from .cone_ops import (BoundaryDensity, ConeParams, DirichletData, boundary_trace,
                       delta_layer, e_kernel, outside_mask, radial_boundary,
                       v_operator)
from .errors import (DivergenceError, DomainError, IllConditionedError,
                     ParameterError, SingularNodeError, StructuralError)
from .projection import cone_project_indicator, g_m_quadrature
from .spectral_core import (FREQUENCY, SPACE, Grid, Multiplier, SampledField,
                            _forward_1d, _inverse_1d, apply_multiplier, dft_axis,
                            dft_forward, dft_inverse)
from .symbol_lab import (DEFAULT_MASK_RADIUS, EllipticSymbol, ProblemOrder,
                         WaveFactorizationPair, q_weight)

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e12
SINGULAR_FLOOR = 1e-10


# --------------------------------------------------------------------------
# factor sampling with the fill rule
# --------------------------------------------------------------------------

@dataclass
class FillReport:
    """Frequency nodes whose factor value was replaced."""

    mode: str
    mask_radius: float
    filled: int
    masked_fraction: float

    def to_dict(self) -> dict:
        return {"mode": self.mode, "mask_radius_dxi": self.mask_radius,
                "filled_nodes": self.filled, "masked_fraction": self.masked_fraction}


def _nearest_fill(values: np.ndarray, bad: np.ndarray) -> np.ndarray:
    if not bad.any():
        return values
    if bad.all():
        raise SingularNodeError("every node is singular", np.argwhere(bad))
    idx = ndimage.distance_transform_edt(bad, return_distances=False, return_indices=True)
    return values[tuple(idx)]


def sample_inverse_factor(factor: Callable, grid: Grid, fill: str = "singular",
                          sym: Optional[EllipticSymbol] = None,
                          mask_radius: float = DEFAULT_MASK_RADIUS):
    """``1 / factor`` on the frequency nodes with the documented fill rule.

    ``fill="singular"`` replaces only nodes where the factor is non-finite or
    below ``SINGULAR_FLOOR`` times its largest modulus.  ``fill="mask"`` also
    replaces every node of the symbol's degeneracy mask.  ``fill="none"``
    raises :class:`SingularNodeError` instead.  Replacement copies the value
    of the nearest kept node.
    """
    xi = grid.nodes(FREQUENCY)
    with np.errstate(all="ignore"):
        fv = np.array(np.broadcast_to(factor(*xi), grid.shape), dtype=complex)
    scale = np.nanmax(np.abs(fv[np.isfinite(fv)])) if np.isfinite(fv).any() else 1.0
    bad = ~np.isfinite(fv) | (np.abs(fv) <= SINGULAR_FLOOR * scale)
    masked = np.zeros(grid.shape, dtype=bool)
    if sym is not None:
        masked = sym.mask(grid, mask_radius * grid.dxi)
    if fill == "none":
        if bad.any():
            raise SingularNodeError(f"factor vanishes at {int(bad.sum())} node(s)", np.argwhere(bad))
        repl = bad
    elif fill == "singular":
        repl = bad
    elif fill == "mask":
        repl = bad | masked
    else:
        raise ParameterError(f"unknown fill mode {fill!r}")
    with np.errstate(all="ignore"):
        inv = np.where(repl, 0.0, 1.0 / np.where(repl, 1.0, fv))
    inv = _nearest_fill(inv, repl)
    report = FillReport(fill, mask_radius, int(repl.sum()), float(masked.mean()))
    if report.filled:
        logger.info("filled %d frequency node(s) of the inverse factor (%s)", report.filled, fill)
    return inv, report


# --------------------------------------------------------------------------
# general solution
# --------------------------------------------------------------------------

@dataclass
class GeneralSolution:
    """Spectrum of the plus solution with the inputs that produced it."""

    spectrum: SampledField
    order: ProblemOrder
    pair: WaveFactorizationPair
    cone: ConeParams
    densities: List[BoundaryDensity]
    lf: Optional[SampledField]
    f_plus: Optional[SampledField] = None
    fill: Optional[FillReport] = None
    projector: str = "indicator"
    layer_term: Optional[SampledField] = None
    f_minus: Optional[SampledField] = None
    q_order: int = 0

    def space(self) -> SampledField:
        return dft_inverse(self.spectrum)


def general_solution(pair: WaveFactorizationPair, cone: ConeParams, order: ProblemOrder,
                     lf: Optional[SampledField], densities: Sequence[BoundaryDensity] = (),
                     grid: Optional[Grid] = None, projector: str = "indicator",
                     tau: Optional[float] = None, gamma: Optional[complex] = None,
                     fill: str = "singular") -> GeneralSolution:
    """Assemble ``u~_+ = A_+^-1 Q P_+ Q^-1 A_-^-1 lf~ + A_+^-1 V_-a F(sum c_k delta^(k-1))``.

    ``P_+`` is the indicator projection (``projector="indicator"``) or the
    singular-kernel quadrature (``projector="gm-quadrature"`` with ``tau``).
    """
    densities = list(densities)
    if not np.isclose(order.kappa, pair.kappa):
        raise StructuralError(f"order kappa={order.kappa} differs from pair kappa={pair.kappa}")
    if densities and len(densities) != order.n:
        raise StructuralError(f"{len(densities)} densities given for n={order.n}")
    if lf is not None:
        if lf.rep != FREQUENCY:
            raise StructuralError("lf must be a frequency field")
        grid = lf.grid
    if grid is None:
        raise StructuralError("a grid is needed when lf is absent")
    inv_plus, report = sample_inverse_factor(pair.plus, grid, fill)
    total = np.zeros(grid.shape, dtype=complex)
    f_plus = f_minus = None
    if lf is not None:
        inv_minus, _ = sample_inverse_factor(pair.minus, grid, fill)
        q = q_weight(order.n)
        qv = q.on_grid(grid)
        w = lf.with_values(lf.values * inv_minus / qv)
        if projector == "indicator":
            f_plus, _ = cone_project_indicator(w, cone)
        elif projector == "gm-quadrature":
            if tau is None:
                raise ParameterError("gm-quadrature projector needs tau")
            f_plus = g_m_quadrature(w, cone, tau, gamma=gamma).f_plus
        else:
            raise ParameterError(f"unknown projector {projector!r}")
        f_minus = w.with_values(w.values - f_plus.values)
        total = total + inv_plus * qv * f_plus.values
    layer = None
    if densities:
        layer = v_operator(delta_layer(densities, grid), cone, -1)
        total = total + inv_plus * layer.values
    spec = SampledField(grid, total, FREQUENCY, order.s)
    return GeneralSolution(spec, order, pair, cone, densities, lf, f_plus, report, projector, layer,
                           f_minus, order.n)


def minus_remainder(sol: GeneralSolution) -> SampledField:
    """Image of ``u_-`` built from the minus part: ``A_- (Q f_- - layer)``.

    Together with ``A u_+`` it reassembles ``lf``, which makes
    ``A u_+ + u_- - lf`` an independent check of the split.
    """
    grid = sol.spectrum.grid
    minus_vals = np.broadcast_to(sol.pair.minus(*grid.nodes(FREQUENCY)), grid.shape)
    vals = np.zeros(grid.shape, dtype=complex)
    if sol.f_minus is not None:
        vals = vals + q_weight(sol.q_order).on_grid(grid) * sol.f_minus.values
    if sol.layer_term is not None:
        vals = vals - sol.layer_term.values
    return SampledField(grid, minus_vals * vals, FREQUENCY)


def apply_operator(sym: EllipticSymbol, u: SampledField) -> SampledField:
    """Apply the symbol as a multiplier; space input gives space output."""
    if u.rep == SPACE:
        return dft_inverse(apply_multiplier(dft_forward(u), sym.as_multiplier()))
    return apply_multiplier(u, sym.as_multiplier())


# --------------------------------------------------------------------------
# trace integrals
# --------------------------------------------------------------------------

def contour_trace(func: Callable[[complex], complex], shift: float = 1.0,
                  drop_constant: bool = False, epsabs: float = 1e-14,
                  epsrel: float = 1e-13) -> complex:
    """``(2 pi)^-1 int func(xi_m) dxi_m`` along ``Im xi_m = shift``.

    ``func`` must be analytic in ``0 <= Im xi_m <= shift`` and decay at least
    like ``1/xi_m`` so the shift does not change the symmetric integral.
    Symmetric pairing ``f(t + i s) + f(-t + i s)`` makes a ``1/xi_m`` tail
    integrable.  With ``drop_constant`` the limit of ``func`` at infinity is
    subtracted first (the part concentrated on the boundary).
    """
    const = 0.0
    if drop_constant:
        big = 1e8
        const = 0.5 * (func(big + 1j * shift) + func(-big + 1j * shift))

    def paired(t):
        return func(t + 1j * shift) + func(-t + 1j * shift) - 2 * const

    with warnings.catch_warnings():
        # after dropping the limit the far tail is pure rounding noise
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: paired(t).real, 0, np.inf, epsabs=epsabs, epsrel=epsrel, limit=400)[0]
        im = integrate.quad(lambda t: paired(t).imag, 0, np.inf, epsabs=epsabs, epsrel=epsrel, limit=400)[0]
    return complex(re, im) / (2 * np.pi)


def residue_check(rho: float, R: float, tail: bool = False) -> complex:
    """``int_{-R}^{R} dxi / (xi + i rho)`` by quadrature.

    The symmetric truncation equals ``-pi i + 2 i arctan(rho / R)``; with
    ``tail=True`` the analytic contribution of ``|xi| > R`` is added and the
    result tends to ``-pi i``.
    """
    if not rho > 0:
        raise ParameterError(f"|xi'|={rho} must be positive")
    if not R > rho:
        raise ParameterError(f"R={R} must exceed |xi'|={rho}")

    def paired(t):
        return -2.0 * rho / (t * t + rho * rho)   # imaginary part of f(t) + f(-t)

    cuts = [0.0]
    c = rho
    while c < R:
        cuts.append(c)
        c *= 10.0
    cuts.append(R)
    im = sum(integrate.quad(paired, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
             for lo, hi in zip(cuts[:-1], cuts[1:]))
    val = 1j * im
    if tail:
        val += -2j * np.arctan(rho / R)
    return complex(val)


def _decay_exponent(pair: WaveFactorizationPair, k_axis: Optional[int], m: int) -> float:
    """Power of ``1/xi_m`` at which the trace integrand decays."""
    if k_axis is None or k_axis != m:
        return pair.kappa
    return pair.kappa - 1.0


# --------------------------------------------------------------------------
# Dirichlet system
# --------------------------------------------------------------------------

@dataclass
class DirichletSystem:
    """Dense boundary system acting on boundary spectra (frequency basis)."""

    matrix: np.ndarray
    grid: Grid
    unknown: str
    trace: str
    condition_estimate: float
    fill: Optional[FillReport] = None
    rhs: Optional[DirichletData] = None
    solution: Optional[DirichletData] = None
    null_modes: int = 0
    info: dict = field(default_factory=dict)

    def apply(self, c: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.ravel(c)).reshape(self.grid.boundary().shape)


def _phase(grid: Grid, a: float, sign: int) -> np.ndarray:
    r = radial_boundary(grid)
    return np.exp(-1j * sign * a * r * grid.nodes(FREQUENCY)[-1])


def _v_batch(vals: np.ndarray, grid: Grid, a: float, sign: int) -> np.ndarray:
    """``V_{sign a}`` on a batch of frequency arrays (leading batch axis)."""
    if a == 0:
        return vals
    h = grid.h
    out = vals
    for ax in range(1, grid.m):
        out = _inverse_1d(out, h, ax)
    out = out * _phase(grid, a, sign)[None]
    for ax in range(1, grid.m):
        out = _forward_1d(out, h, ax)
    return out


def _check_decay(expo: float, principal_value: bool) -> bool:
    """Validate the trace integrand decay ``|xi_m|^-expo``; return whether to drop its limit.

    ``expo > 1`` converges absolutely and ``expo = 1`` under symmetric
    truncation.  ``expo = 0`` is admitted with ``principal_value`` by removing
    the constant limit (a term concentrated on the boundary).
    """
    if expo >= 1:
        return False
    if expo == 0 and principal_value:
        return True
    raise DivergenceError(
        f"trace integrand decays like |xi_m|^-{expo:g}; needs index above 1"
        + ("" if expo else " or principal_value=True"))


def _trace_multiplier(pair, grid, fill, extra: Optional[Multiplier], drop: bool = False):
    """Sampled ``extra * A_+^-1`` (minus its limit when ``drop``).

    With an extra multiplier the fill acts on the product and searches along
    ``xi_m`` within the same ``xi'`` column, so a zero of ``xi_k`` at the
    singular node is kept.
    """
    inv, report = sample_inverse_factor(pair.plus, grid, fill)
    if extra is None:
        return inv, report
    xi = grid.nodes(FREQUENCY)
    with np.errstate(all="ignore"):
        fv = np.broadcast_to(pair.plus(*xi), grid.shape)
        prod = np.array(np.broadcast_to(extra(*xi), grid.shape) / fv, dtype=complex)
    scale = np.nanmax(np.abs(fv[np.isfinite(fv)]))
    bad = ~np.isfinite(prod) | (np.abs(fv) <= SINGULAR_FLOOR * scale)
    if bad.any():
        if fill == "none":
            raise SingularNodeError(f"factor vanishes at {int(bad.sum())} node(s)", np.argwhere(bad))
        sampling = [1e6] * (grid.m - 1) + [1.0]
        idx = ndimage.distance_transform_edt(bad, sampling=sampling, return_distances=False,
                                             return_indices=True)
        prod = prod[tuple(idx)]
    if drop:
        big = 1e8
        xp = xi[:-1]
        lim = 0.5 * (extra(*xp, big) / pair.plus(*xp, big) + extra(*xp, -big) / pair.plus(*xp, -big))
        prod = prod - lim
    return prod, report


def dirichlet_matrix(pair: WaveFactorizationPair, cone: ConeParams, grid: Grid,
                     trace: str = "grid", unknown: str = "surface",
                     extra: Optional[Multiplier] = None, fill: str = "singular",
                     principal_value: bool = False, tail: bool = True,
                     chunk: int = 64) -> DirichletSystem:
    """Boundary operator mapping a density spectrum to the trace of the solution.

    Column ``j`` is ``boundary_trace(V_a(M V_-a(e_j (x) 1)))`` with
    ``M = A_+^-1`` (times ``extra`` for oblique conditions).  With
    ``unknown="hyperplane"`` the inner ``V_-a`` is omitted, i.e. the unknown
    is the density already carried to the hyperplane.

    Parameters
    ----------
    trace : {"grid", "continuum"}
        ``grid`` sums over the sampled ``xi_m`` nodes.  ``continuum`` evaluates
        the ``xi_m`` integral by shifted-contour quadrature of the factor and
        is available for ``a = 0`` where the system is diagonal.
    tail : bool
        For ``trace="grid"`` and ``a = 0``, add the exact integral of the
        integrand beyond the sampled band (the diagonal system makes it a
        per-node scalar).  Ignored for ``a > 0``.
    """
    if grid.m != cone.m:
        raise StructuralError("grid and cone dimensions differ")
    if unknown not in ("surface", "hyperplane"):
        raise ParameterError(f"unknown must be 'surface' or 'hyperplane', got {unknown!r}")
    k_axis = getattr(extra, "axis", None) if extra is not None else None
    expo = _decay_exponent(pair, k_axis, grid.m) if extra is not None else pair.kappa
    drop = _check_decay(expo, principal_value)
    bgrid = grid.boundary()
    nb = int(np.prod(bgrid.shape))
    if trace == "continuum":
        if cone.a != 0:
            raise DomainError("continuum trace is implemented for a = 0 (diagonal system)")
        xis = [c.ravel() for c in np.meshgrid(*([grid.xi] * (grid.m - 1)), indexing="ij")]
        diag = np.empty(nb, dtype=complex)
        for j in range(nb):
            xp = [x[j] for x in xis]

            def f(z, xp=xp):
                val = 1.0 / pair.plus(*xp, z)
                if extra is not None:
                    val = val * extra(*xp, z)
                return val
            diag[j] = contour_trace(f, shift=1.0, drop_constant=drop)
        K = np.diag(diag)
        report = None
    elif trace == "grid":
        mult, report = _trace_multiplier(pair, grid, fill, extra, drop)
        K = np.empty((nb, nb), dtype=complex)
        a = cone.a
        for start in range(0, nb, chunk):
            cols = np.arange(start, min(nb, start + chunk))
            basis = np.zeros((len(cols),) + grid.shape, dtype=complex)
            for i, j in enumerate(cols):
                basis[(i,) + np.unravel_index(j, bgrid.shape)] = 1.0
            w = basis if unknown == "hyperplane" else _v_batch(basis, grid, a, -1)
            w = _v_batch(w * mult[None], grid, a, 1)
            tr = w.sum(axis=-1) * grid.dxi / (2 * np.pi)
            K[:, cols] = tr.reshape(len(cols), nb).T
        if tail and a == 0:
            K = K + np.diag(_band_tail(pair, grid, extra, drop))
    else:
        raise ParameterError(f"unknown trace mode {trace!r}")
    cond = _condition(K)
    return DirichletSystem(K, grid, unknown, trace, cond, report)


def _band_tail(pair, grid: Grid, extra, drop: bool) -> np.ndarray:
    """``(2 pi)^-1`` times the integral of the a = 0 trace integrand outside the band.

    The node sum covers ``[xi_0 - dxi/2, xi_{N-1} + dxi/2]``; the remainder is
    the paired tail beyond ``B = pi/h + dxi/2`` plus the one cell ``[B - dxi, B]``.
    """
    B = np.pi / grid.h + grid.dxi / 2
    xis = [c.ravel() for c in np.meshgrid(*([grid.xi] * (grid.m - 1)), indexing="ij")]
    out = np.empty(len(xis[0]), dtype=complex)
    for j in range(len(out)):
        xp = [x[j] for x in xis]

        def f(z, xp=xp):
            val = 1.0 / pair.plus(*xp, z)
            if extra is not None:
                val = val * extra(*xp, z)
            return val
        lim = 0.0
        if drop:
            lim = 0.5 * (f(1e8) + f(-1e8))

        def paired(t):
            return f(t) + f(-t) - 2 * lim

        def cell(t):
            return f(t) - lim
        tot = 0j
        with warnings.catch_warnings():
            # a dropped limit leaves a tail at rounding level
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for fun, lo, hi in ((paired, B, np.inf), (cell, B - grid.dxi, B)):
                re = integrate.quad(lambda t: complex(fun(t)).real, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                im = integrate.quad(lambda t: complex(fun(t)).imag, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                tot += complex(re, im)
        out[j] = tot / (2 * np.pi)
    return out


def _condition(K: np.ndarray) -> float:
    with np.errstate(all="ignore"):
        try:
            return float(np.abs(np.linalg.cond(K, 1)))
        except np.linalg.LinAlgError:
            return float("inf")


def _solve_system(system: DirichletSystem, g_hat: np.ndarray, allow_null: bool = False):
    K = system.matrix
    rhs = np.ravel(g_hat)
    null = np.zeros(K.shape[1], dtype=bool)
    if allow_null:
        scale = np.abs(K).max()
        null = (np.linalg.norm(K, axis=0) <= 1e-13 * scale) & (np.linalg.norm(K, axis=1) <= 1e-13 * scale)
    keep = ~null
    Kr = K[np.ix_(keep, keep)]
    cond = _condition(Kr)
    system.condition_estimate = cond
    system.null_modes = int(null.sum())
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(f"boundary system condition estimate {cond:.3e} exceeds {MAX_CONDITION:.0e}", cond)
    c = np.zeros(K.shape[1], dtype=complex)
    c[keep] = np.linalg.solve(Kr, rhs[keep])
    system.info["null_mask"] = null
    return c


# --------------------------------------------------------------------------
# layer kernel K_a (m = 2)
# --------------------------------------------------------------------------

def _leading_coefficient(pair: WaveFactorizationPair, eta_p: float, power: float) -> complex:
    big = 1e6
    return complex(pair.plus(eta_p, big)) / big ** power


def k_kernel(eta_p: float, xi_p: float, pair: WaveFactorizationPair, a: float, eps: float,
             R: float = 2e3) -> complex:
    """``int E_a(xi', xi_m) / A_+(eta', xi_m) dxi_m`` by adaptive quadrature (m = 2).

    The integrand decays like ``xi_m^-(kappa+1)``; beyond ``|xi_m| = R`` its
    leading term is integrated analytically.
    """
    if not eps > 0:
        raise ParameterError(f"eps={eps} must be positive")
    if pair.kappa <= 0:
        raise DivergenceError("K kernel needs a factor of positive index")
    if a <= 0:
        raise ParameterError("K kernel needs a > 0")

    def f(t):
        return e_kernel(xi_p, t, a, eps) / pair.plus(eta_p, t)

    poles = sorted({-xi_p / a, xi_p / a})
    pts = [p for p in poles if -R < p < R]
    width = max(eps / a, 1e-12)
    edges = sorted(set([-R, R] + pts + [p - 50 * width for p in pts] + [p + 50 * width for p in pts]))
    edges = [e for e in edges if -R <= e <= R]
    total = 0j
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            re = integrate.quad(lambda t: f(t).real, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)[0]
            im = integrate.quad(lambda t: f(t).imag, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=400)[0]
            total += complex(re, im)
    p = pair.kappa + 1.0
    lead = -2j / (a * _leading_coefficient(pair, eta_p, pair.kappa))
    if np.isclose(p, round(p)) and int(round(p)) % 2 == 0:
        total += lead * 2.0 / ((p - 1.0) * R ** (p - 1.0))
    elif not np.isclose(p, round(p)):
        total += lead * 2.0 / ((p - 1.0) * R ** (p - 1.0))   # even tail approximation
    return complex(total)


def _pole_free_depth(pair: WaveFactorizationPair) -> Optional[float]:
    """Half the distance below the real axis to the nearest zero of ``A_+``, if known."""
    theta = pair.params.get("theta")
    return None if theta is None else 0.5 * float(theta)


def k_kernel_contour(eta_p, xi_p, pair: WaveFactorizationPair, a: float, eps: float = 0.0,
                     depth: Optional[float] = None, panel: float = 0.25,
                     order: int = 8) -> np.ndarray:
    """Vectorised ``k_kernel`` along the shifted line ``Im xi_m = -depth``.

    The poles of ``E_a`` lie in the upper half plane and the zeros of
    ``A_+`` below ``-2 depth``, so the shift leaves the integral unchanged and
    the integrand is smooth on the new line.  Composite Gauss-Legendre
    panels cover ``|Re xi_m| <= T`` and a ``1/u`` map covers the tails.
    ``eps = 0`` gives the limit directly.
    """
    if pair.kappa <= 0:
        raise DivergenceError("K kernel needs a factor of positive index")
    if a <= 0:
        raise ParameterError("K kernel needs a > 0")
    if eps < 0:
        raise ParameterError(f"eps={eps} must be >= 0")
    if depth is None:
        depth = _pole_free_depth(pair)
    if depth is None or depth <= 0:
        raise StructuralError("contour route needs a pole-free strip below the real axis")
    eta_p = np.asarray(eta_p, dtype=float)
    xi_p = np.asarray(xi_p, dtype=float)
    reach = (np.max(np.abs(xi_p)) + np.max(np.abs(eta_p))) / a
    T = reach + 20.0 * depth + 10.0
    npan = int(np.ceil(2 * T / panel))
    gx, gw = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(-T, T, npan + 1)
    half = 0.5 * (edges[1] - edges[0])
    t = (edges[:-1, None] + half * (gx[None] + 1)).ravel()
    w = np.tile(half * gw, npan)
    ux, uw = np.polynomial.legendre.leggauss(24)
    u = 0.5 * (ux + 1)               # u in (0, 1), t = +-T / u
    tt = T / u
    wt = 0.5 * uw * T / u ** 2
    t = np.concatenate([t, tt, -tt])
    w = np.concatenate([w, wt, wt])
    z = t - 1j * depth
    shape = np.broadcast(eta_p, xi_p).shape
    ep = np.broadcast_to(eta_p, shape)[..., None]
    xp = np.broadcast_to(xi_p, shape)[..., None]
    E = -1j * (1.0 / (a * z + xp - 1j * eps) + 1.0 / (a * z - xp - 1j * eps))
    f = E / pair.plus(ep, z)
    return np.sum(f * w, axis=-1)


def k_kernel_matrix(pair: WaveFactorizationPair, cone: ConeParams, grid: Grid,
                    eps: float = 0.0, method: str = "contour") -> np.ndarray:
    """Hyperplane-form boundary matrix assembled entry by entry from the K kernel.

    Entry ``(i, j)`` is ``(2 pi)^-2 dxi K_a(xi'_j, xi'_i - xi'_j)``.
    ``method="contour"`` uses :func:`k_kernel_contour` (pairs with a known
    pole-free strip); ``"adaptive"`` calls :func:`k_kernel` per entry.
    """
    if grid.m != 2:
        raise StructuralError("K kernel assembly is implemented for m = 2")
    xi = grid.xi
    eta = xi[None, :]
    diff = xi[:, None] - xi[None, :]
    if method == "contour":
        K = np.empty((grid.N, grid.N), dtype=complex)
        for i in range(grid.N):
            K[i] = k_kernel_contour(eta[0], diff[i], pair, cone.a, eps)
    elif method == "adaptive":
        if not eps > 0:
            raise ParameterError("adaptive assembly needs eps > 0")
        K = np.array([[k_kernel(xi[j], xi[i] - xi[j], pair, cone.a, eps)
                       for j in range(grid.N)] for i in range(grid.N)])
    else:
        raise ParameterError(f"unknown method {method!r}")
    return K * grid.dxi / (2 * np.pi) ** 2


# --------------------------------------------------------------------------
# half-space baseline
# --------------------------------------------------------------------------

def poisson_constant(m: int) -> float:
    """``c_m = Gamma(m/2) / pi^(m/2)`` so that ``int P(x', x_m) dx' = 1``."""
    return gamma_fn(m / 2) / np.pi ** (m / 2)


def poisson_kernel(xp, xm, m: int = 2):
    """``P(x', x_m) = c_m x_m / (|x'|^2 + x_m^2)^(m/2)`` for ``x_m > 0``."""
    xm = np.asarray(xm, dtype=float)
    if np.any(xm <= 0):
        raise DomainError("Poisson kernel needs x_m > 0")
    xp = np.asarray(xp, dtype=float)
    r2 = xp ** 2 if m == 2 else np.sum(xp ** 2, axis=-1)
    return poisson_constant(m) * xm / (r2 + xm ** 2) ** (m / 2)


def poisson_kernel_periodic(xp, xm, L: float, c2: Optional[float] = None):
    """Poisson kernel of the strip periodic in ``x'`` with period ``2L`` (m = 2).

    Closed form of the image sum
    ``sum_k P(x' + 2kL, x_m) = sinh(pi x_m/L) / (2L (cosh(pi x_m/L) - cos(pi x'/L)))``.
    ``c2`` rescales the result relative to the normalised constant.
    """
    xm = np.asarray(xm, dtype=float)
    if np.any(xm <= 0):
        raise DomainError("Poisson kernel needs x_m > 0")
    k = np.pi / L
    val = np.sinh(k * xm) / (2 * L * (np.cosh(k * xm) - np.cos(k * np.asarray(xp))))
    if c2 is not None:
        val = val * c2 / poisson_constant(2)
    return val


def solve_dirichlet_halfspace(g: DirichletData, grid: Grid) -> SampledField:
    """Harmonic extension of ``g`` into ``x_m > 0`` by the boundary spectrum.

    Each positive slice is ``F'^-1(g~(xi') exp(-x_m |xi'|))``; the slice
    ``x_m = 0`` holds ``g`` and negative slices are zero.
    """
    bgrid = grid.boundary()
    if g.grid != bgrid:
        raise StructuralError("boundary data grid does not match the solution grid")
    gh = g.to_frequency().values
    xi_p = bgrid.nodes(FREQUENCY)
    rho = np.sqrt(sum(c ** 2 for c in xi_p))
    out = np.zeros(grid.shape, dtype=complex)
    x = grid.x
    for k in range(grid.origin + 1, grid.N):
        sl = SampledField(bgrid, gh * np.exp(-x[k] * rho), FREQUENCY)
        out[..., k] = dft_axis(sl, range(1, bgrid.m + 1), "inverse").values
    out[..., grid.origin] = g.to_space().values
    return SampledField(grid, out, SPACE)


def poisson_convolution(g: DirichletData, grid: Grid, periodic: bool = True,
                        c2: Optional[float] = None) -> SampledField:
    """Direct quadrature ``h sum_j P(x' - y_j, x_m) g(y_j)`` per positive slice (m = 2)."""
    if grid.m != 2:
        raise StructuralError("direct Poisson convolution is implemented for m = 2")
    gs = g.to_space().values
    x = grid.x
    h = grid.h
    out = np.zeros(grid.shape, dtype=complex)
    d = x[:, None] - x[None, :]
    for k in range(grid.origin + 1, grid.N):
        if periodic:
            P = poisson_kernel_periodic(d, x[k], grid.L, c2)
        else:
            P = poisson_kernel(d, x[k], 2) * (1.0 if c2 is None else c2 / poisson_constant(2))
        out[:, k] = h * (P @ gs)
    out[:, grid.origin] = gs
    return SampledField(grid, out, SPACE)


def reconstruct_potential(pair: WaveFactorizationPair, d_a: DirichletData, grid: Grid,
                          fill: str = "singular", route: str = "grid") -> SampledField:
    """Potential ``u_+`` generated by the hyperplane density ``d_a``.

    Parameters
    ----------
    route : {"grid", "slice"}
        ``grid`` is ``F^-1(A_+^-1(xi) d~_a(xi'))`` with the full discrete
        inverse.  ``slice`` convolves ``d_a`` in ``x'`` with the closed-form
        partial inverse of ``A_+^-1`` over ``xi_m`` at each positive ``x_m``
        (needs ``pair.partial_kernel``); the ``x_m = 0`` slice holds the mean
        of the one-sided limits and negative slices are zero.  The grid route
        inherits the periodic wrap of the ``xi_m`` inverse, which is visible
        for kernels that do not decay in ``x_m`` (the ``xi' = 0`` mode of the
        half-space factor).
    """
    if d_a.grid != grid.boundary():
        raise StructuralError("density grid does not match the solution grid")
    dh = d_a.to_frequency().values
    if route == "grid":
        inv, _ = sample_inverse_factor(pair.plus, grid, fill)
        return dft_inverse(SampledField(grid, inv * dh[..., None], FREQUENCY))
    if route != "slice":
        raise ParameterError(f"unknown route {route!r}")
    if pair.partial_kernel is None:
        raise StructuralError(f"pair {pair.name!r} has no closed-form partial kernel")
    bgrid = grid.boundary()
    xi_p = bgrid.nodes(FREQUENCY)
    out = np.zeros(grid.shape, dtype=complex)
    axes = range(1, bgrid.m + 1)
    x = grid.x
    for k in range(grid.origin, grid.N):
        xm = x[k] if k > grid.origin else 0.0
        w = pair.partial_kernel(xi_p, xm)
        if k == grid.origin:
            w = 0.5 * w
        sl = SampledField(bgrid, np.broadcast_to(w * dh, bgrid.shape), FREQUENCY)
        out[..., k] = dft_axis(sl, axes, "inverse").values
    return SampledField(grid, out, SPACE)


def partial_inverse_xi_m(pair: WaveFactorizationPair, xi_p: Sequence[float], s: float,
                         shift: float = 1.0) -> complex:
    """``(2 pi)^-1 int exp(-i s xi_m) / A_+(xi', xi_m) dxi_m`` by quadrature.

    For ``s < 0`` the contour closes in the upper half plane and the value is
    0; for ``s > 0`` the integral is evaluated on the real line with an
    oscillatory weight.
    """
    if s < 0:
        return 0j
    if s == 0:
        return contour_trace(lambda z: 1.0 / pair.plus(*xi_p, z), shift)

    def paired(t, part):
        fp = 1.0 / pair.plus(*xi_p, t)
        fm = 1.0 / pair.plus(*xi_p, -t)
        if part == "cos":
            return fp + fm
        return -1j * (fp - fm)

    vals = 0j
    for part, wvar in (("cos", "cos"), ("sin", "sin")):
        re = integrate.quad(lambda t: paired(t, part).real, 0, np.inf, weight=wvar, wvar=s, limlst=200)[0]
        im = integrate.quad(lambda t: paired(t, part).imag, 0, np.inf, weight=wvar, wvar=s, limlst=200)[0]
        vals += complex(re, im)
    return vals / (2 * np.pi)


# --------------------------------------------------------------------------
# difference stencils for interior residuals
# --------------------------------------------------------------------------

def _d1(F, h, ax):
    return (np.roll(F, -1, ax) - np.roll(F, 1, ax)) / (2 * h)


def _d2(F, h, ax):
    return (np.roll(F, -1, ax) - 2 * F + np.roll(F, 1, ax)) / h ** 2


def difference_operator(pair: WaveFactorizationPair, grid: Grid) -> Callable[[np.ndarray], np.ndarray]:
    """Second-order difference realisation of the symbol ``A = A_+ A_-``.

    Available for the catalog pairs.  Under ``xi_j <-> i d_j`` the Lorentz
    factors are ``-a^2 (d_m +- theta)^2 + Laplacian'`` and the half-space
    symbol is ``-Laplacian``.
    """
    h = grid.h
    m = grid.m
    lat = range(m - 1)
    if pair.name == "synthetic_lorentz":
        a = pair.params["a"]
        th = pair.params["theta"]

        def factor(F, sgn):
            out = -a * a * (_d2(F, h, m - 1) + 2 * sgn * th * _d1(F, h, m - 1) + th * th * F)
            for ax in lat:
                out = out + _d2(F, h, ax)
            return out
        return lambda U: factor(factor(U, 1.0), -1.0)
    if pair.name == "halfspace_laplacian":
        return lambda U: -sum(_d2(U, h, ax) for ax in range(m))
    raise StructuralError(f"no difference stencil for pair {pair.name!r}")


def interior_residual(pair: WaveFactorizationPair, u: SampledField, cone: ConeParams,
                      margin: float = 1.0) -> float:
    """l2 norm of the stencil residual ``A u`` at nodes at least ``margin`` inside the cone.

    Nodes within ``margin`` of the box edge are excluded too.
    """
    if u.rep != SPACE:
        raise StructuralError("interior_residual needs a space field")
    g = u.grid
    R = difference_operator(pair, g)(u.values)
    coords = g.nodes(SPACE)
    r = radial_boundary(g)
    dist = (coords[-1] - cone.a * r) / np.sqrt(1.0 + cone.a ** 2)
    keep = np.broadcast_to(dist > margin, g.shape).copy()
    for c in coords:
        keep &= np.broadcast_to(np.abs(c) < g.L - margin, g.shape)
    return float(np.sqrt(np.sum(np.abs(R[keep]) ** 2) * g.h ** g.m))


def support_leakage(u: SampledField, cone: ConeParams) -> float:
    """``||u outside the closed cone|| / ||u||``."""
    if u.rep != SPACE:
        raise StructuralError("support_leakage needs a space field")
    tot = np.linalg.norm(u.values)
    if tot == 0:
        return 0.0
    return float(np.linalg.norm(u.values[outside_mask(u.grid, cone)]) / tot)


# --------------------------------------------------------------------------
# cone Dirichlet problem
# --------------------------------------------------------------------------

@dataclass
class DirichletSolution:
    """Density, solution field and postcondition metrics of a boundary solve."""

    density: DirichletData
    u_plus: SampledField
    method: str
    trace_defect: float
    leakage: float
    condition_estimate: float
    general: Optional[GeneralSolution] = None
    system: Optional[DirichletSystem] = None
    vertex_mass: complex = 0j
    iterations: int = 0
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"method": self.method, "trace_defect": self.trace_defect,
               "leakage": self.leakage, "condition_estimate": self.condition_estimate,
               "iterations": self.iterations}
        if self.method == "collocation":
            out["vertex_mass"] = [self.vertex_mass.real, self.vertex_mass.imag]
        out.update(self.info)
        return out


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(16)


class _SideDensity:
    """Density on one side ``sign * y > 0`` sampled at cell midpoints of ``|y|``."""

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        from scipy.interpolate import make_interp_spline
        self.nodes = nodes
        self.values = values
        self._re = make_interp_spline(nodes, values.real, k=5)
        self._im = make_interp_spline(nodes, values.imag, k=5)

    def __call__(self, r):
        return self._re(r) + 1j * self._im(r)


def _side_integral(kern, a, dens: _SideDensity, p, q, X, Y):
    """``int_p^q c(y) W(X - y, Y - a|y|) dy`` by 16-point Gauss-Legendre."""
    ln = np.maximum(q - p, 0.0)
    yq = p[..., None] + (_GAUSS_X + 1) / 2 * ln[..., None]
    f = dens(np.abs(yq)) * kern(X[..., None] - yq, Y[..., None] - a * np.abs(yq))
    return np.sum(_GAUSS_W * f, axis=-1) * ln / 2


class _ConePotential:
    """``u(x) = mu W(x) + int c(y) W(x' - y, x_m - a|y|) dy`` on the closed cone (m = 2)."""

    def __init__(self, kern, a, L, mu, sides):
        self.kern, self.a, self.L, self.mu, self.sides = kern, a, L, mu, sides

    def __call__(self, X, Y):
        a, L = self.a, self.L
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        lo = np.maximum((a * X - Y) / (2 * a), -L)
        hi = np.minimum((Y + a * X) / (2 * a), L)
        v = self.mu * self.kern(X, Y)
        v = v + _side_integral(self.kern, a, self.sides[-1], lo, np.minimum(hi, 0.0), X, Y)
        v = v + _side_integral(self.kern, a, self.sides[1], np.maximum(lo, 0.0), hi, X, Y)
        return np.where(Y >= a * np.abs(X) - 1e-14 * (1 + np.abs(Y)), v, 0.0)


def _solve_collocation(pair: WaveFactorizationPair, cone: ConeParams, g: DirichletData,
                       grid: Grid, max_iter: int = 6):
    """Lateral-surface density by Volterra collocation with defect correction (m = 2).

    The unknowns are a point mass at the vertex and, on each side, density
    values at the cell midpoints of ``|y|``.  A midpoint product rule gives a
    lower-triangular system; its solution is refined against the trace of a
    quintic-spline density until the defect stops decreasing.
    """
    kern = pair.space_kernel
    a = cone.a
    h = grid.h
    x = grid.x
    i0 = grid.origin
    gs = g.to_space().values
    gnorm = np.linalg.norm(gs)
    w00 = complex(kern(np.array(0.0), np.array(0.0)))
    if w00 == 0:
        raise SingularNodeError("space kernel vanishes at the vertex", np.zeros((1, 2), int))
    mu = 2.0 * gs[i0] / w00
    sides = {}
    conds = []
    hist = []
    for s in (1, -1):
        idx = np.arange(i0 + 1, grid.N) if s > 0 else np.arange(i0 - 1, -1, -1)
        xb = x[idx]
        r = np.abs(xb)
        nb = len(xb)
        nodes = (np.arange(nb) + 0.5) * h
        M = np.zeros((nb, nb), dtype=complex)
        for i in range(nb):
            y = np.arange(i + 1)[:, None] * h + (_GAUSS_X + 1) / 2 * h
            vals = kern(s * (r[i] - y), a * (r[i] - y))
            M[i, :i + 1] = 0.5 * np.sum(_GAUSS_W * vals, axis=-1) * h / 2
        conds.append(_condition(M))
        lo = np.where(s > 0, 0.0, xb)
        hi = np.where(s > 0, xb, 0.0)

        def trace_map(c, lo=lo, hi=hi, xb=xb, nodes=nodes):
            return 0.5 * _side_integral(kern, a, _SideDensity(nodes, c), lo, hi, xb, a * np.abs(xb))

        rhs = gs[idx] - 0.5 * mu * kern(xb, a * r)
        c = np.linalg.solve(M, rhs)
        best = (np.inf, c)
        it = 0
        for it in range(max_iter):
            d = rhs - trace_map(c)
            err = np.linalg.norm(d) / max(gnorm, 1e-300)
            hist.append(err)
            if err >= best[0]:
                break
            best = (err, c)
            c = c + np.linalg.solve(M, d)
        sides[s] = _SideDensity(nodes, best[1])
    cond = max(conds)
    if cond > MAX_CONDITION:
        raise IllConditionedError(f"collocation condition estimate {cond:.3e}", cond)
    pot = _ConePotential(kern, a, grid.L, mu, sides)
    return pot, mu, sides, cond, hist


def solve_dirichlet_cone(pair: WaveFactorizationPair, cone: ConeParams, g: DirichletData,
                         grid: Optional[Grid] = None, method: str = "auto",
                         unknown: str = "surface", fill: str = "singular",
                         trace: str = "grid") -> DirichletSolution:
    """Solve the Dirichlet closure ``trace(u_+) = g`` on the lateral surface.

    Parameters
    ----------
    method : {"auto", "spectral", "collocation"}
        ``spectral`` assembles the dense frequency-domain boundary system and
        solves it.  ``collocation`` represents the solution as a layer of the
        closed-form space kernel on the lateral surface (m = 2, ``a > 0``);
        it keeps the support inside the closed cone exactly.  ``auto`` picks
        collocation when available.

    Notes
    -----
    ``trace_defect`` is ``||trace(u_+) - g|| / ||g||`` with the trace taken
    as the mean of the one-sided limits; ``leakage`` is the share of the
    sampled solution outside the closed cone.  For the spectral method the
    trace is the system's own (``trace`` selects grid or continuum), and
    ``info["node_sum_defect"]`` repeats it with the plain node sum of the
    flattened spectrum.
    """
    if grid is None:
        m = g.grid.m + 1
        grid = Grid(m, g.grid.L, g.grid.N)
    if g.grid != grid.boundary():
        raise StructuralError("boundary data grid does not match the solution grid")
    if method == "auto":
        method = "collocation" if (pair.space_kernel is not None and cone.a > 0 and grid.m == 2) else "spectral"
    gs = g.to_space().values
    if np.linalg.norm(gs) == 0:
        zero_b = DirichletData(grid.boundary(), np.zeros(grid.boundary().shape), FREQUENCY)
        u0 = SampledField(grid, np.zeros(grid.shape), SPACE)
        return DirichletSolution(zero_b, u0, method, 0.0, 0.0, 1.0)
    if method == "collocation":
        if pair.space_kernel is None or cone.a <= 0 or grid.m != 2:
            raise StructuralError("collocation needs a closed-form space kernel, a > 0 and m = 2")
        pot, mu, sides, cond, hist = _solve_collocation(pair, cone, g, grid)
        X, Y = np.meshgrid(grid.x, grid.x, indexing="ij")
        U = pot(X, Y)
        u = SampledField(grid, U, SPACE)
        tr = 0.5 * pot(grid.x, cone.a * np.abs(grid.x))
        defect = float(np.linalg.norm(tr - gs) / np.linalg.norm(gs))
        dens = np.zeros(grid.N, dtype=complex)
        i0 = grid.origin
        dens[i0 + 1:] = sides[1](np.abs(grid.x[i0 + 1:]))
        dens[:i0] = sides[-1](np.abs(grid.x[:i0]))
        dens[i0] = 0.5 * (sides[1](0.0) + sides[-1](0.0))
        density = DirichletData(grid.boundary(), dens, SPACE)
        sol = DirichletSolution(density, u, "collocation", defect, support_leakage(u, cone), cond,
                                vertex_mass=complex(mu), iterations=len(hist),
                                info={"defect_history": [float(v) for v in hist]})
        sol.info["potential"] = pot
        return sol
    if method != "spectral":
        raise ParameterError(f"unknown method {method!r}")
    system = dirichlet_matrix(pair, cone, grid, trace=trace, unknown=unknown, fill=fill)
    g_hat = g.to_frequency()
    c = _solve_system(system, g_hat.values).reshape(grid.boundary().shape)
    dens = DirichletData(grid.boundary(), c, FREQUENCY)
    system.rhs = g_hat
    system.solution = dens
    order = ProblemOrder.from_s_kappa(pair.kappa - 1.0, pair.kappa)
    if unknown == "surface":
        gen = general_solution(pair, cone, order, None, [BoundaryDensity(1, dens, order.density_smoothness(1))],
                               grid=grid, fill=fill)
    else:
        inv, rep = sample_inverse_factor(pair.plus, grid, fill)
        layer = SampledField(grid, np.broadcast_to(c[..., None], grid.shape), FREQUENCY)
        gen = GeneralSolution(SampledField(grid, inv * layer.values, FREQUENCY, order.s), order, pair,
                              cone, [BoundaryDensity(1, dens)], None, None, rep, "indicator", layer)
    gn = np.linalg.norm(g_hat.values)
    defect = float(np.linalg.norm(system.apply(c) - g_hat.values) / gn)
    flat = v_operator(gen.spectrum, cone, 1)
    node_sum = float(np.linalg.norm(boundary_trace(flat).values - g_hat.values) / gn)
    u = gen.space()
    return DirichletSolution(dens, u, "spectral", defect, support_leakage(u, cone),
                             system.condition_estimate, gen, system,
                             info={"node_sum_defect": node_sum, "trace": trace})


# --------------------------------------------------------------------------
# oblique derivative variant
# --------------------------------------------------------------------------

def axis_multiplier(k: int, m: int) -> Multiplier:
    """The multiplier ``xi_k`` (1-based axis) tagged with its axis."""
    if not 1 <= k <= m:
        raise StructuralError(f"axis k={k} outside 1..{m}")
    mult = Multiplier(lambda *xi: np.asarray(xi[k - 1]) + 0j * np.asarray(xi[-1]), 1.0, f"xi_{k}")
    mult.axis = k
    return mult


def oblique_variant(pair: WaveFactorizationPair, cone: ConeParams, k: int, g: DirichletData,
                    grid: Optional[Grid] = None, trace: str = "grid",
                    principal_value: bool = True, fill: str = "singular") -> DirichletSolution:
    """Boundary closure with ``A_+^-1`` replaced by ``xi_k A_+^-1`` throughout.

    Frequencies where the system has an identically zero row and column (for
    ``k < m`` the plane ``xi_k = 0``) are null modes; the density is set to
    zero there and the count is reported in ``info``.  ``trace_defect`` is
    the solve residual on the remaining modes; the share of ``g~`` carried by
    null modes, which no density can match, is ``info["incompatible_fraction"]``.
    """
    if grid is None:
        grid = Grid(g.grid.m + 1, g.grid.L, g.grid.N)
    if g.grid != grid.boundary():
        raise StructuralError("boundary data grid does not match the solution grid")
    mult = axis_multiplier(k, grid.m)
    system = dirichlet_matrix(pair, cone, grid, trace=trace, unknown="surface", extra=mult,
                              fill=fill, principal_value=principal_value)
    g_hat = g.to_frequency()
    bshape = grid.boundary().shape
    if np.linalg.norm(g_hat.values) == 0:
        c = np.zeros(bshape, dtype=complex)
    else:
        c = _solve_system(system, g_hat.values, allow_null=True).reshape(bshape)
    dens = DirichletData(grid.boundary(), c, FREQUENCY)
    system.rhs, system.solution = g_hat, dens
    order = ProblemOrder.from_s_kappa(pair.kappa - 1.0, pair.kappa)
    gen = general_solution(pair, cone, order, None, [BoundaryDensity(1, dens)], grid=grid, fill=fill)
    deriv = gen.spectrum.with_values(gen.spectrum.values * mult.on_grid(grid))
    gv = np.ravel(g_hat.values)
    null = system.info.get("null_mask", np.zeros(gv.size, dtype=bool))
    gn = np.linalg.norm(gv)
    r = np.ravel(system.apply(c)) - gv
    defect = float(np.linalg.norm(r[~null]) / gn) if gn else 0.0
    incompatible = float(np.linalg.norm(gv[null]) / gn) if gn else 0.0
    u = gen.space()
    sol = DirichletSolution(dens, u, "spectral", defect, support_leakage(u, cone),
                            system.condition_estimate, gen, system,
                            info={"null_modes": system.null_modes, "axis": k,
                                  "incompatible_fraction": incompatible})
    sol.info["derivative_spectrum"] = deriv
    return sol
