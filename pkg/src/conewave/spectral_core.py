"""Uniform periodic grids, discrete Fourier transforms and sampled multipliers.

Fourier convention
------------------
Forward transform ``u~(xi) = int exp(+i x.xi) u(x) dx``, inverse
``u(x) = (2 pi)^-m int exp(-i x.xi) u~(xi) dxi``.  With this sign a
multiplier ``xi_j`` acts as ``i d/dx_j`` and a spectrum analytic in the upper
half plane of ``xi_m`` belongs to a function supported in ``x_m >= 0``.

Both integrals are discretised by the trapezoid rule on the periodic grid,
so the discrete pair is an exact inverse pair and Parseval holds with the
``h^m`` and ``(dxi / 2 pi)^m`` weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.fft import fft, fftshift, ifft, ifftshift
from scipy.signal import fftconvolve

from .errors import SingularNodeError, StructuralError

logger = logging.getLogger(__name__)

SPACE = "space"
FREQUENCY = "frequency"
CONVENTION = {
    "forward": "int exp(+i x.xi) u(x) dx",
    "inverse": "(2 pi)^-m int exp(-i x.xi) u~(xi) dxi",
    "derivative_rule": "xi_j <-> i d/dx_j",
    "quadrature": "trapezoid on the periodic grid",
}


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid with ``N`` nodes per axis on ``[-L, L)``.

    Space nodes are ``x_j = -L + j h`` and frequency nodes
    ``xi_k = -pi/h + k dxi`` with ``h = 2L/N`` and ``dxi = pi/L``.  The
    origin of both lattices sits at index ``N // 2``.
    """

    m: int
    L: float
    N: int

    def __post_init__(self):
        if self.m not in (1, 2, 3):
            raise StructuralError(f"dimension m={self.m} not in (1, 2, 3)")
        if self.N < 8 or self.N % 2:
            raise StructuralError(f"N={self.N} must be even and >= 8")
        if not self.L > 0:
            raise StructuralError(f"half-width L={self.L} must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi / self.L

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.m

    @property
    def origin(self) -> int:
        return self.N // 2

    @property
    def x(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @property
    def xi(self) -> np.ndarray:
        return -np.pi / self.h + self.dxi * np.arange(self.N)

    def nodes(self, rep) -> Tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays for a per-axis representation.

        ``rep`` is either a single representation name or a tuple of names,
        one per axis.
        """
        reps = _as_reps(rep, self.m)
        out = []
        for ax, r in enumerate(reps):
            vec = self.x if r == SPACE else self.xi
            shape = [1] * self.m
            shape[ax] = self.N
            out.append(vec.reshape(shape))
        return tuple(out)

    def boundary(self) -> "Grid":
        """The (m-1)-dimensional grid carried by the hyperplane x_m = 0."""
        if self.m < 2:
            raise StructuralError("a 1-d grid has no boundary grid")
        return Grid(self.m - 1, self.L, self.N)

    def to_dict(self) -> dict:
        return {"m": self.m, "L": self.L, "N": self.N}


def _as_reps(rep, m) -> Tuple[str, ...]:
    if isinstance(rep, str):
        reps = (rep,) * m
    else:
        reps = tuple(rep)
    if len(reps) != m or any(r not in (SPACE, FREQUENCY) for r in reps):
        raise StructuralError(f"invalid representation {rep!r} for m={m}")
    return reps


@dataclass
class SampledField:
    """Complex samples on a grid, each axis in space or frequency form."""

    grid: Grid
    values: np.ndarray
    reps: Tuple[str, ...]
    smoothness_tag: Optional[float] = None

    def __init__(self, grid, values, rep=SPACE, smoothness_tag=None):
        self.grid = grid
        self.values = np.asarray(values, dtype=complex)
        self.reps = _as_reps(rep, grid.m)
        self.smoothness_tag = smoothness_tag
        if self.values.shape != grid.shape:
            raise StructuralError(
                f"value array shape {self.values.shape} does not match grid {grid.shape}")

    @property
    def rep(self) -> str:
        if all(r == SPACE for r in self.reps):
            return SPACE
        if all(r == FREQUENCY for r in self.reps):
            return FREQUENCY
        return "mixed"

    def nodes(self):
        return self.grid.nodes(self.reps)

    def with_values(self, values, reps=None, smoothness_tag="keep") -> "SampledField":
        tag = self.smoothness_tag if smoothness_tag == "keep" else smoothness_tag
        return SampledField(self.grid, values, self.reps if reps is None else reps, tag)

    def copy(self) -> "SampledField":
        return self.with_values(self.values.copy())

    def l2_norm(self) -> float:
        """Quadrature l2 norm with the weight of the current representation."""
        w = 1.0
        for r in self.reps:
            w *= self.grid.h if r == SPACE else self.grid.dxi / (2 * np.pi)
        return float(np.sqrt(w * np.sum(np.abs(self.values) ** 2)))


def sample(grid: Grid, func: Callable, rep=SPACE, smoothness_tag=None) -> SampledField:
    """Sample ``func(*coords)`` on the grid nodes of representation ``rep``."""
    coords = grid.nodes(rep)
    vals = np.broadcast_to(func(*coords), grid.shape)
    return SampledField(grid, np.array(vals, dtype=complex), rep, smoothness_tag)


def _forward_1d(values, h, axis):
    n = values.shape[axis]
    return h * n * fftshift(ifft(ifftshift(values, axes=axis), axis=axis), axes=axis)


def _inverse_1d(values, h, axis):
    n = values.shape[axis]
    return fftshift(fft(ifftshift(values, axes=axis), axis=axis), axes=axis) / (h * n)


def dft_axis(fld: SampledField, axes: Sequence[int], direction: str = "forward") -> SampledField:
    """Transform along the listed axes only.

    Parameters
    ----------
    fld : SampledField
        Input field.
    axes : sequence of int
        One-based axis numbers, a subset of ``1..m``.
    direction : {"forward", "inverse"}
        ``forward`` maps space axes to frequency, ``inverse`` the reverse.
    """
    axes = [int(a) for a in axes]
    if len(set(axes)) != len(axes):
        raise StructuralError(f"repeated axis in {axes}")
    if any(a < 1 or a > fld.grid.m for a in axes):
        raise StructuralError(f"axes {axes} outside 1..{fld.grid.m}")
    if direction not in ("forward", "inverse"):
        raise StructuralError(f"unknown direction {direction!r}")
    want = SPACE if direction == "forward" else FREQUENCY
    reps = list(fld.reps)
    vals = fld.values
    for a in axes:
        ax = a - 1
        if reps[ax] != want:
            raise StructuralError(f"axis {a} is already in {reps[ax]} representation")
        if direction == "forward":
            vals = _forward_1d(vals, fld.grid.h, ax)
            reps[ax] = FREQUENCY
        else:
            vals = _inverse_1d(vals, fld.grid.h, ax)
            reps[ax] = SPACE
    return SampledField(fld.grid, vals, tuple(reps), fld.smoothness_tag)


def dft_forward(fld: SampledField) -> SampledField:
    """Full forward transform of a space field."""
    if fld.rep != SPACE:
        raise StructuralError(f"dft_forward needs a space field, got {fld.rep}")
    return dft_axis(fld, range(1, fld.grid.m + 1), "forward")


def dft_inverse(fld: SampledField) -> SampledField:
    """Full inverse transform of a frequency field."""
    if fld.rep != FREQUENCY:
        raise StructuralError(f"dft_inverse needs a frequency field, got {fld.rep}")
    return dft_axis(fld, range(1, fld.grid.m + 1), "inverse")


@dataclass
class Multiplier:
    """Fourier multiplier ``xi -> evaluator(xi)`` of order ``order``.

    The evaluator receives one broadcastable array per axis.
    """

    evaluator: Callable
    order: float = 0.0
    name: str = ""

    def __call__(self, *xi):
        return self.evaluator(*xi)

    def on_grid(self, grid: Grid) -> np.ndarray:
        vals = np.broadcast_to(self.evaluator(*grid.nodes(FREQUENCY)), grid.shape)
        return np.array(vals, dtype=complex)


def apply_multiplier(spec: SampledField, mult: Multiplier) -> SampledField:
    """Pointwise product with a multiplier sampled at the frequency nodes."""
    if spec.rep != FREQUENCY:
        raise StructuralError(f"apply_multiplier needs a frequency field, got {spec.rep}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = mult.on_grid(spec.grid)
    bad = ~np.isfinite(vals)
    if bad.any():
        nodes = np.argwhere(bad)
        raise SingularNodeError(
            f"multiplier {mult.name or '<anonymous>'} is non-finite at {len(nodes)} node(s), "
            f"first {nodes[:5].tolist()}", nodes)
    tag = None if spec.smoothness_tag is None else spec.smoothness_tag - mult.order
    return SampledField(spec.grid, vals * spec.values, FREQUENCY, tag)


def sobolev_norm(spec: SampledField, s: float) -> float:
    """Discrete ``H^s`` norm with weight ``(1 + |xi|^2)^s``."""
    if spec.rep != FREQUENCY:
        raise StructuralError(f"sobolev_norm needs a frequency field, got {spec.rep}")
    g = spec.grid
    r2 = sum(c ** 2 for c in g.nodes(FREQUENCY))
    weight = (1.0 + r2) ** s
    total = np.sum(weight * np.abs(spec.values) ** 2) * g.dxi ** g.m
    return float(np.sqrt(total / (2 * np.pi) ** g.m))


def linear_convolution(spec: np.ndarray, kernel: np.ndarray, spacing: float) -> np.ndarray:
    """Direct (non-periodic) convolution sum on the node lattice.

    ``kernel`` is sampled on the difference lattice with ``2N - 1`` points per
    axis, index ``N - 1`` holding the zero offset.  Returns
    ``sum_eta spec[eta] kernel[xi - eta] * spacing^m`` at the ``N^m`` nodes.
    """
    if kernel.shape != tuple(2 * s - 1 for s in spec.shape):
        raise StructuralError(f"kernel shape {kernel.shape} is not the difference lattice of {spec.shape}")
    full = fftconvolve(spec, kernel, mode="full")
    sl = tuple(slice(s - 1, 2 * s - 1) for s in spec.shape)
    return full[sl] * spacing ** spec.ndim


def relative_l2(a, b) -> float:
    """``||a - b|| / ||b||`` (returns ``||a||`` when ``b`` vanishes)."""
    a = np.asarray(a)
    b = np.asarray(b)
    nb = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return float(diff / nb) if nb > 0 else float(diff)
