"""Cone geometry, the flattening transform and its Fourier conjugate.

``t_transform(u, cone, +1)`` flattens the cone: ``(T u)(x', t) = u(x', t + a|x'|)``
so the lateral surface ``x_m = a|x'|`` lands on the hyperplane ``t = 0``.
Sign ``-1`` is the inverse map.  Both are applied exactly as a per-column
phase ``exp(-i sign a |x'| xi_m)`` in the mixed ``(x', xi_m)`` representation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from .errors import ParameterError, StructuralError
from .spectral_core import FREQUENCY, SPACE, Grid, SampledField, dft_axis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConeParams:
    """Circular cone ``{x_m > a |x'|}`` in dimension ``m``.

    ``a = 0`` is admitted and gives the half-space ``x_m > 0``.
    """

    a: float
    m: int = 2

    def __post_init__(self):
        if self.a < 0:
            raise ParameterError(f"cone parameter a={self.a} must be >= 0 (use the sign argument)")
        if self.m not in (2, 3):
            raise StructuralError(f"cone dimension m={self.m} not in (2, 3)")

    def to_dict(self) -> dict:
        return {"a": self.a, "m": self.m}


def _split(point, m):
    p = np.asarray(point, dtype=float)
    if p.shape[-1] != m:
        raise StructuralError(f"point of dimension {p.shape[-1]} for m={m}")
    return np.linalg.norm(p[..., :-1], axis=-1), p[..., -1]


def cone_contains(x, cone: ConeParams):
    """Strict membership ``x_m > a |x'|``."""
    r, xm = _split(x, cone.m)
    return xm > cone.a * r


def conjugate_contains(tau, cone: ConeParams):
    """Strict membership in the conjugate cone ``a tau_m > |tau'|``."""
    r, tm = _split(tau, cone.m)
    return cone.a * tm > r


def radial_boundary(grid: Grid) -> np.ndarray:
    """``|x'|`` on the boundary nodes, shaped to broadcast over the full grid."""
    coords = grid.nodes(SPACE)[:-1]
    r = np.sqrt(sum(c ** 2 for c in coords))
    return r


def _phase_in_mixed(u_mixed: SampledField, a: float, sign: int) -> np.ndarray:
    grid = u_mixed.grid
    r = radial_boundary(grid)
    xi_m = grid.nodes(FREQUENCY)[-1]
    return u_mixed.values * np.exp(-1j * sign * a * r * xi_m)


def _check_sign(sign):
    if sign not in (1, -1):
        raise StructuralError(f"sign must be +1 or -1, got {sign}")


def t_transform(u: SampledField, cone: ConeParams, sign: int = 1) -> SampledField:
    """Flatten (``sign=+1``) or un-flatten (``sign=-1``) a space field."""
    _check_sign(sign)
    if u.rep != SPACE:
        raise StructuralError(f"t_transform needs a space field, got {u.rep}")
    if cone.a == 0:
        return u.copy()
    m = u.grid.m
    mixed = dft_axis(u, [m], "forward")
    mixed = mixed.with_values(_phase_in_mixed(mixed, cone.a, sign))
    return dft_axis(mixed, [m], "inverse")


def v_operator(spec: SampledField, cone: ConeParams, sign: int = 1) -> SampledField:
    """Fourier conjugate of ``t_transform``: ``F T F^-1``."""
    _check_sign(sign)
    if spec.rep != FREQUENCY:
        raise StructuralError(f"v_operator needs a frequency field, got {spec.rep}")
    if cone.a == 0:
        return spec.copy()
    m = spec.grid.m
    mixed = dft_axis(spec, range(1, m), "inverse")
    mixed = mixed.with_values(_phase_in_mixed(mixed, cone.a, sign))
    return dft_axis(mixed, range(1, m), "forward")


def e_kernel(xi_p, xi_m, a: float, eps: float):
    """Closed form of the one-dimensional transform of ``exp(-i a |y| xi_m)``.

    Regularised by ``exp(-eps |y|)``; returns
    ``-i [ (a xi_m + xi' - i eps)^-1 + (a xi_m - xi' - i eps)^-1 ]``.
    """
    if not eps > 0:
        raise ParameterError(f"regularisation eps={eps} must be positive")
    xi_p = np.asarray(xi_p, dtype=float)
    xi_m = np.asarray(xi_m, dtype=float)
    return -1j * (1.0 / (a * xi_m + xi_p - 1j * eps) + 1.0 / (a * xi_m - xi_p - 1j * eps))


def v_operator_by_kernel(spec: SampledField, cone: ConeParams, eps: float,
                         sign: int = 1) -> SampledField:
    """``V`` realised as a convolution in ``xi'`` against the sampled kernel (m = 2).

    Computes ``(2 pi)^-1 sum_eta E(xi' - eta', xi_m) spec(eta', xi_m) dxi`` per
    ``xi_m`` column; the kernel for ``sign=-1`` is ``E`` with ``a -> -a``.
    """
    _check_sign(sign)
    if spec.grid.m != 2:
        raise StructuralError("closed-form kernel route is implemented for m = 2 only")
    if spec.rep != FREQUENCY:
        raise StructuralError(f"v_operator_by_kernel needs a frequency field, got {spec.rep}")
    g = spec.grid
    n = g.N
    d = g.dxi * np.arange(-(n - 1), n)
    out = np.empty(g.shape, dtype=complex)
    for k, xm in enumerate(g.xi):
        kern = e_kernel(d, xm, sign * cone.a, eps)
        col = np.convolve(spec.values[:, k], kern, mode="full")[n - 1:2 * n - 1]
        out[:, k] = col * g.dxi / (2 * np.pi)
    return spec.with_values(out)


@dataclass
class DirichletData:
    """Boundary values on the ``(m-1)``-dimensional boundary grid."""

    grid: Grid
    values: np.ndarray
    rep: str = SPACE

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise StructuralError(
                f"boundary values of shape {self.values.shape} do not match {self.grid.shape}")
        if self.rep not in (SPACE, FREQUENCY):
            raise StructuralError(f"invalid representation {self.rep!r}")

    def as_field(self) -> SampledField:
        return SampledField(self.grid, self.values, self.rep)

    def to_frequency(self) -> "DirichletData":
        if self.rep == FREQUENCY:
            return self
        f = dft_axis(self.as_field(), range(1, self.grid.m + 1), "forward")
        return DirichletData(self.grid, f.values, FREQUENCY)

    def to_space(self) -> "DirichletData":
        if self.rep == SPACE:
            return self
        f = dft_axis(self.as_field(), range(1, self.grid.m + 1), "inverse")
        return DirichletData(self.grid, f.values, SPACE)


@dataclass
class BoundaryDensity:
    """Coefficient ``c_k`` of the layer ``c_k(x') delta^(k-1)(x_m)``."""

    k_index: int
    data: DirichletData
    smoothness_tag: Optional[float] = None

    def __post_init__(self):
        if self.k_index < 1:
            raise StructuralError(f"k_index={self.k_index} must be >= 1")


def boundary_trace(spec: SampledField, tail: Optional[np.ndarray] = None) -> DirichletData:
    """Restriction to ``x_m = 0`` computed from the spectrum.

    Trapezoid sum ``(2 pi)^-1 sum_{xi_m} spec dxi`` for every ``xi'``.  At a
    jump in ``x_m`` this is the mean of the one-sided limits.

    Parameters
    ----------
    tail : array over the boundary grid, optional
        Coefficient ``b(xi')`` of a ``b / xi_m^2`` tail.  The analytic
        contribution of ``|xi_m|`` beyond the sampled band is added.
    """
    if spec.reps[-1] != FREQUENCY:
        raise StructuralError("boundary_trace needs the last axis in frequency form")
    g = spec.grid
    vals = spec.values.sum(axis=-1) * g.dxi
    if tail is not None:
        xi = g.xi
        lo = -xi[0] + g.dxi / 2   # 1/xi^2 integrated outside the midpoint cells
        hi = xi[-1] + g.dxi / 2
        vals = vals + np.asarray(tail) * (1.0 / lo + 1.0 / hi)
    rep = FREQUENCY if all(r == FREQUENCY for r in spec.reps[:-1]) else SPACE
    if any(r != rep for r in spec.reps[:-1]):
        raise StructuralError("mixed boundary representation is not supported")
    return DirichletData(g.boundary(), vals / (2 * np.pi), rep)


def delta_layer(densities: Iterable[BoundaryDensity], grid: Grid) -> SampledField:
    """Spectrum of ``sum_k c_k(x') delta^(k-1)(x_m)``.

    Under the ``xi <-> i d/dx`` rule the ``k``-th term is
    ``c~_k(xi') (-i xi_m)^(k-1)``.
    """
    dens: List[BoundaryDensity] = list(densities)
    ks = [d.k_index for d in dens]
    if len(set(ks)) != len(ks):
        raise StructuralError(f"duplicate k_index in {ks}")
    out = np.zeros(grid.shape, dtype=complex)
    xi_m = grid.nodes(FREQUENCY)[-1]
    for d in dens:
        if d.data.grid != grid.boundary():
            raise StructuralError("density grid does not match the boundary grid")
        ck = d.data.to_frequency().values[..., None]
        out = out + ck * (-1j * xi_m) ** (d.k_index - 1)
    return SampledField(grid, out, FREQUENCY)


def layer_mass_fraction(u: SampledField, layers: int = 1) -> float:
    """Share of the squared l2 mass within ``layers`` nodes of ``x_m = 0``."""
    if u.rep != SPACE:
        raise StructuralError("layer_mass_fraction needs a space field")
    o = u.grid.origin
    total = np.sum(np.abs(u.values) ** 2)
    if total == 0:
        return 1.0
    near = np.sum(np.abs(u.values[..., o - layers:o + layers + 1]) ** 2)
    return float(near / total)


def outside_mask(grid: Grid, cone: ConeParams) -> np.ndarray:
    """Nodes strictly outside the closed cone (interface nodes count as inside)."""
    coords = grid.nodes(SPACE)
    r = radial_boundary(grid)
    xm = coords[-1]
    tol = 1e-12 * max(1.0, grid.L)
    return np.broadcast_to(xm < cone.a * r - tol, grid.shape)
