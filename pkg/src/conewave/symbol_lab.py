"""Elliptic symbols, wave-factorisation pairs and numerical probes of them.

A factorisation pair splits ``A = A_plus * A_minus`` where ``A_plus`` is
analytic (and zero free) on ``R^m + i C*`` and ``A_minus`` on ``R^m - i C*``,
``C*`` being the conjugate cone ``{a tau_m > |tau'|}``.  Evaluators take one
array per coordinate and accept complex arguments so the tube can be probed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .cone_ops import ConeParams, conjugate_contains
from .errors import DegeneracyError, DomainError, ParameterError, StructuralError
from .spectral_core import FREQUENCY, Grid, Multiplier

logger = logging.getLogger(__name__)

DEFAULT_MASK_RADIUS = 3.0   # in units of dxi


@dataclass
class EllipticSymbol:
    """Symbol ``A(xi)`` of order ``order``.

    ``singular_set`` returns the distance of a frequency node to the set where
    the symbol degenerates (``None`` when there is none); nodes closer than the
    mask radius are excluded from ellipticity statistics.
    """

    evaluator: Callable
    order: float
    name: str = ""
    singular_set: Optional[Callable] = None

    def __call__(self, *xi):
        return self.evaluator(*xi)

    def as_multiplier(self) -> Multiplier:
        return Multiplier(self.evaluator, self.order, self.name)

    def mask(self, grid: Grid, radius: Optional[float]) -> np.ndarray:
        """Boolean array of excluded frequency nodes."""
        if self.singular_set is None or radius is None or radius <= 0:
            return np.zeros(grid.shape, dtype=bool)
        dist = np.broadcast_to(self.singular_set(*grid.nodes(FREQUENCY)), grid.shape)
        return dist < radius


@dataclass
class WaveFactorizationPair:
    """Plus and minus factors of a symbol.

    Attributes
    ----------
    plus, minus : callable
        Factor evaluators; complex arguments allowed in their tubes.
    kappa : float
        Factorisation index (growth order of the plus factor).
    alpha : float
        Order of the factorised symbol.
    cone : ConeParams
        Cone whose conjugate defines the analyticity tubes.
    space_kernel : callable, optional
        Closed form of ``F^-1(1 / plus)`` in space for ``m = 2``, evaluated on
        the closed side of its support.  Enables the collocation solver.
    partial_kernel : callable, optional
        Closed form of the inverse transform of ``1 / plus`` over ``xi_m`` only,
        as a function of ``(xi', x_m)`` for ``x_m > 0`` (it vanishes for
        ``x_m < 0``).  Enables slice-wise reconstruction.
    """

    plus: Callable
    minus: Callable
    kappa: float
    alpha: float
    cone: ConeParams
    name: str = ""
    space_kernel: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    partial_kernel: Optional[Callable] = None

    def plus_inverse(self, *xi):
        return 1.0 / self.plus(*xi)

    def plus_multiplier(self) -> Multiplier:
        return Multiplier(self.plus, self.kappa, f"{self.name}:plus")

    def minus_multiplier(self) -> Multiplier:
        return Multiplier(self.minus, self.alpha - self.kappa, f"{self.name}:minus")


@dataclass(frozen=True)
class ProblemOrder:
    """Bookkeeping ``kappa - s = n + delta`` with ``|delta| < 1/2``."""

    s: float
    kappa: float
    n: int
    delta: float

    def __post_init__(self):
        if abs(self.delta) >= 0.5:
            raise ParameterError(f"|delta|={abs(self.delta)} must be < 1/2")
        if not np.isclose(self.kappa - self.s, self.n + self.delta, rtol=0, atol=1e-12):
            raise ParameterError("kappa - s must equal n + delta")
        if self.n < 1:
            raise ParameterError(f"n={self.n} must be a positive integer")
        if self.n != int(round(self.kappa - self.s)):
            raise ParameterError("n must equal round(kappa - s)")

    @classmethod
    def from_s_kappa(cls, s: float, kappa: float) -> "ProblemOrder":
        n = int(round(kappa - s))
        return cls(s, kappa, n, (kappa - s) - n)

    def density_smoothness(self, k: int) -> float:
        """Smoothness index ``s - kappa + k - 1/2`` of the k-th boundary density."""
        return self.s - self.kappa + k - 0.5


@dataclass
class EllipticityReport:
    c1: float
    c2: float
    masked_fraction: float
    worst_node: Tuple[int, ...]


def ellipticity_check(sym: EllipticSymbol, grid: Grid,
                      mask_radius: Optional[float] = None) -> EllipticityReport:
    """Bounds of ``|A(xi)| (1 + |xi|)^-alpha`` over the unmasked nodes.

    ``mask_radius`` is in units of ``dxi``; ``None`` uses the default 3 when the
    symbol declares a singular set, 0 gives an empty mask.
    """
    if mask_radius is None:
        mask_radius = DEFAULT_MASK_RADIUS
    xi = grid.nodes(FREQUENCY)
    r = np.sqrt(sum(c ** 2 for c in xi))
    with np.errstate(all="ignore"):
        ratio = np.abs(np.broadcast_to(sym(*xi), grid.shape)) * (1.0 + r) ** (-sym.order)
    masked = sym.mask(grid, mask_radius * grid.dxi)
    live = ~masked & np.isfinite(ratio)
    if not live.any():
        raise DegeneracyError("every node is masked")
    vals = np.where(live, ratio, np.nan)
    c1 = float(np.nanmin(vals))
    c2 = float(np.nanmax(vals))
    worst = tuple(int(i) for i in np.unravel_index(np.nanargmin(vals), grid.shape))
    if not c1 > 1e-13 * max(c2, 1.0):
        zeros = np.argwhere(live & (ratio <= 1e-13 * max(c2, 1.0)))
        raise DegeneracyError(
            f"symbol {sym.name or '<anonymous>'} vanishes at {len(zeros)} unmasked node(s)", zeros)
    frac = float(masked.mean())
    logger.debug("ellipticity %s: c1=%.3e c2=%.3e masked=%.3f", sym.name, c1, c2, frac)
    return EllipticityReport(c1, c2, frac, worst)


def factorization_residual(pair: WaveFactorizationPair, sym: EllipticSymbol, grid: Grid,
                           floor: float = 1e-12,
                           mask_radius: Optional[float] = None) -> Tuple[float, Tuple[int, ...]]:
    """Worst relative defect ``|A_+ A_- - A| / max(|A|, floor)`` on the grid.

    Returns the residual and the index of the worst node.
    """
    if not np.isclose(pair.alpha, sym.order):
        raise StructuralError(f"pair order {pair.alpha} differs from symbol order {sym.order}")
    xi = grid.nodes(FREQUENCY)
    with np.errstate(all="ignore"):
        prod = np.broadcast_to(pair.plus(*xi) * pair.minus(*xi), grid.shape)
        ref = np.broadcast_to(sym(*xi), grid.shape)
        err = np.abs(prod - ref) / np.maximum(np.abs(ref), floor)
    if mask_radius is None:
        mask_radius = DEFAULT_MASK_RADIUS
    err = np.where(sym.mask(grid, mask_radius * grid.dxi), 0.0, err)
    idx = np.unravel_index(np.argmax(err), grid.shape)
    return float(err[idx]), tuple(int(i) for i in idx)


def factorization_residual_at(pair: WaveFactorizationPair, sym: EllipticSymbol,
                              points: np.ndarray, floor: float = 1e-12) -> float:
    """Same defect at explicit frequency points (rows of ``points``)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cols = [pts[:, j] for j in range(pts.shape[1])]
    prod = pair.plus(*cols) * pair.minus(*cols)
    ref = sym(*cols)
    return float(np.max(np.abs(prod - ref) / np.maximum(np.abs(ref), floor)))


def _cr_defect(factor, zeta: np.ndarray, step: float) -> float:
    """Largest ``|(d/dRe + i d/dIm) f|`` over all coordinates, central differences."""
    worst = 0.0
    f0 = abs(complex(factor(*zeta)))
    for j in range(len(zeta)):
        e = np.zeros(len(zeta), dtype=complex)
        e[j] = step
        dre = (factor(*(zeta + e)) - factor(*(zeta - e))) / (2 * step)
        dim = (factor(*(zeta + 1j * e)) - factor(*(zeta - 1j * e))) / (2 * step)
        worst = max(worst, abs(complex(dre + 1j * dim)) / max(1.0, f0))
    return worst


def tube_analyticity_probe(factor: Callable, cone: ConeParams,
                           samples: Sequence[Tuple[Sequence[float], Sequence[float]]],
                           step: float, side: str = "plus",
                           axes: Optional[Sequence[int]] = None) -> Tuple[float, float]:
    """Cauchy-Riemann defect and growth exponent of a factor in its tube.

    Parameters
    ----------
    samples : sequence of (xi, tau)
        Base points; every ``tau`` must lie strictly inside the conjugate cone
        (its negative for ``side="minus"``).
    step : float
        Central-difference step in both real and imaginary directions.
    axes : sequence of int, optional
        Zero-based coordinates to differentiate (all by default).  Use
        ``[m - 1]`` for factors continued in ``xi_m`` only.

    Returns
    -------
    cr_residual : float
        Largest defect relative to ``max(1, |f|)``.
    growth_exponent : float
        Least-squares slope of ``log|f|`` against ``log(1 + |xi| + |tau|)``.
    """
    if side not in ("plus", "minus"):
        raise StructuralError(f"side must be 'plus' or 'minus', got {side!r}")
    sgn = 1.0 if side == "plus" else -1.0
    cr = 0.0
    logs, logf = [], []
    for xi, tau in samples:
        xi = np.asarray(xi, dtype=float)
        tau = np.asarray(tau, dtype=float)
        if len(xi) != cone.m or len(tau) != cone.m:
            raise StructuralError("sample dimension does not match the cone")
        t_in = sgn * tau
        interior = conjugate_contains(t_in, cone) if cone.a > 0 else (
            t_in[-1] > 0 and np.allclose(t_in[:-1], 0))
        if not interior:
            raise DomainError(f"tau={tau.tolist()} is outside the {side} tube")
        zeta = xi + 1j * tau
        if axes is None:
            cr = max(cr, _cr_defect(factor, zeta, step))
        else:
            for j in axes:
                def along_axis(z, j=j, zeta=zeta):
                    w = zeta.copy()
                    w[j] = z
                    return factor(*w)
                cr = max(cr, _cr_defect(along_axis, np.array([zeta[j]]), step))
        val = abs(complex(factor(*zeta)))
        logs.append(np.log1p(np.linalg.norm(xi) + np.linalg.norm(tau)))
        logf.append(np.log(val) if val > 0 else -np.inf)
    logs = np.asarray(logs)
    logf = np.asarray(logf)
    if len(logs) > 1 and np.ptp(logs) > 0 and np.all(np.isfinite(logf)):
        slope = float(np.polyfit(logs, logf, 1)[0])
    else:
        slope = 0.0
    return float(cr), slope


def _radius(coords):
    return np.sqrt(sum(np.asarray(c) ** 2 for c in coords))


def _square_sum(coords):
    return sum(np.asarray(c) ** 2 for c in coords)


def catalog_halfspace_laplacian(m: int = 2) -> Tuple[EllipticSymbol, WaveFactorizationPair]:
    """``|xi|^2 = (xi_m + i|xi'|)(xi_m - i|xi'|)`` with index 1, cone ``a = 0``.

    The factors are continued in ``xi_m`` only; ``|xi'|`` is taken as the
    principal square root of the complex square sum.
    """
    def symbol(*xi):
        return _square_sum(xi)

    def plus(*xi):
        return xi[-1] + 1j * np.sqrt(_square_sum(xi[:-1]) + 0j)

    def minus(*xi):
        return xi[-1] - 1j * np.sqrt(_square_sum(xi[:-1]) + 0j)

    def poisson_kernel_space(xp, xm):
        # F^-1 of 1/(xi_m + i|xi'|) for m = 2 is -i P(x', x_m) on x_m > 0.
        xp = np.asarray(xp, dtype=float)
        xm = np.asarray(xm, dtype=float)
        with np.errstate(all="ignore"):
            val = -1j * xm / (np.pi * (xp ** 2 + xm ** 2))
        return np.where(xm > 0, val, 0.0)

    def partial(xi_p, xm):
        # pole at -i|xi'| in the lower half plane: -i exp(-x_m |xi'|)
        rho = np.sqrt(_square_sum(xi_p))
        return -1j * np.exp(-np.asarray(xm) * rho)

    sym = EllipticSymbol(symbol, 2.0, "halfspace_laplacian",
                         singular_set=lambda *xi: _radius(xi))
    pair = WaveFactorizationPair(plus, minus, 1.0, 2.0, ConeParams(0.0, m),
                                 "halfspace_laplacian",
                                 space_kernel=poisson_kernel_space if m == 2 else None,
                                 partial_kernel=partial)
    return sym, pair


def catalog_synthetic_lorentz(a: float, theta: float,
                              m: int = 2) -> Tuple[EllipticSymbol, WaveFactorizationPair]:
    """Factor pair built from the Lorentz form ``L(z) = a^2 z_m^2 - z'.z'``.

    ``A_+(xi) = L(xi + i theta e_m)``, ``A_-(xi) = L(xi - i theta e_m)`` and
    ``A = A_+ A_-``; order 4, index 2.  On real frequencies ``A = |A_+|^2``.
    """
    if not (a > 0 and theta > 0):
        raise ParameterError(f"a={a} and theta={theta} must be positive")

    def lorentz(*z):
        return a * a * z[-1] ** 2 - _square_sum(z[:-1])

    def plus(*xi):
        return lorentz(*xi[:-1], xi[-1] + 1j * theta)

    def minus(*xi):
        return lorentz(*xi[:-1], xi[-1] - 1j * theta)

    def symbol(*xi):
        return plus(*xi) * minus(*xi)

    def light_cone_distance(*xi):
        # Euclidean distance to {|xi'| = a |xi_m|}.
        rp = _radius(xi[:-1])
        xm = np.abs(xi[-1])
        return np.abs(rp - a * xm) / np.sqrt(1.0 + a * a)

    def space_kernel(xp, xm):
        # -(1/2a) exp(-theta x_m) on the closed cone x_m >= a|x'| (m = 2).
        xp = np.asarray(xp, dtype=float)
        xm = np.asarray(xm, dtype=float)
        inside = xm >= a * np.abs(xp) - 1e-12 * (1.0 + np.abs(xm))
        return np.where(inside, -np.exp(-theta * xm) / (2.0 * a), 0.0)

    def partial(xi_p, xm):
        # poles -i theta +- |xi'|/a: -exp(-theta x_m) sin(x_m |xi'|/a) / (a |xi'|)
        rho = np.sqrt(_square_sum(xi_p))
        xm = np.asarray(xm, dtype=float)
        arg = xm * rho / a
        safe = np.where(rho > 0, rho, 1.0)
        sinc = np.where(rho > 0, np.sin(arg) / (a * safe), xm / (a * a))
        return -np.exp(-theta * xm) * sinc + 0j

    sym = EllipticSymbol(symbol, 4.0, "synthetic_lorentz", singular_set=light_cone_distance)
    pair = WaveFactorizationPair(plus, minus, 2.0, 4.0, ConeParams(a, m), "synthetic_lorentz",
                                 space_kernel=space_kernel if m == 2 else None,
                                 params={"a": a, "theta": theta}, partial_kernel=partial)
    return sym, pair


CATALOG = {
    "halfspace_laplacian": catalog_halfspace_laplacian,
    "synthetic_lorentz": catalog_synthetic_lorentz,
}


def q_weight(n: int) -> Multiplier:
    """``Q(xi) = (xi_m + i sqrt(1 + |xi'|^2))^n``, so ``|Q| = (1 + |xi|^2)^(n/2)``."""
    if int(n) != n or n < 1:
        raise ParameterError(f"n={n} must be a positive integer")
    n = int(n)

    def q(*xi):
        return (xi[-1] + 1j * np.sqrt(1.0 + _square_sum(xi[:-1]) + 0j)) ** n

    return Multiplier(q, float(n), f"Q^{n}")
