"""Plus/minus splitting of Fourier images (the jump problem in a cone).

Two realisations are provided.  The indicator route cuts the inverse
transform with the closed cone indicator and is exact on the grid.  The
quadrature route sums the singular kernel
``(zeta'.zeta' - a^2 (zeta_m + i tau)^2)^(-m/2)`` over frequency nodes and is
normalised by a calibrated constant.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import factorial, gamma as gamma_fn
from typing import Optional, Tuple

import numpy as np

from .cone_ops import ConeParams, outside_mask
from .errors import ParameterError, ResourceError, StructuralError
from .spectral_core import (FREQUENCY, SampledField, dft_forward, dft_inverse,
                            linear_convolution)

logger = logging.getLogger(__name__)

MAX_QUADRATURE_NODES = {2: 128, 3: 24}


def cone_project_indicator(spec: SampledField, cone: ConeParams) -> Tuple[SampledField, SampledField]:
    """Split ``spec`` into images of functions supported in the closed cone and off it.

    Interface nodes (``x_m = a|x'|``) belong to the plus part.
    """
    if spec.rep != FREQUENCY:
        raise StructuralError(f"projection needs a frequency field, got {spec.rep}")
    if spec.grid.m != cone.m:
        raise StructuralError("grid and cone dimensions differ")
    u = dft_inverse(spec)
    keep = ~outside_mask(spec.grid, cone)
    plus = dft_forward(u.with_values(np.where(keep, u.values, 0.0)))
    plus.smoothness_tag = spec.smoothness_tag
    minus = spec.with_values(spec.values - plus.values)
    return plus, minus


def gm_constant_theory(cone: ConeParams) -> float:
    """Normalisation of the kernel sum predicted by the continuum limit.

    Returns ``a omega_{m-1} (m-1)! / (2 pi)^m`` with ``omega_{m-1}`` the
    volume of the unit ball in ``R^(m-1)``.  At finite ``tau`` the kernel
    reproduces the cone indicator damped by ``exp(-tau x_m)``, so calibrated
    values exceed this one by the damping at the reference support.
    """
    m = cone.m
    ball = np.pi ** ((m - 1) / 2) / gamma_fn((m - 1) / 2 + 1)
    return float(cone.a * ball * factorial(m - 1) / (2 * np.pi) ** m)


def _gm_kernel(n: int, dxi: float, tau: float, cone: ConeParams) -> np.ndarray:
    d = dxi * np.arange(-(n - 1), n)
    grids = np.meshgrid(*([d] * cone.m), indexing="ij")
    zp2 = sum(z ** 2 for z in grids[:-1])
    w = zp2 - cone.a ** 2 * (grids[-1] + 1j * tau) ** 2
    if cone.m == 2:
        return 1.0 / w
    return 1.0 / (w * np.sqrt(w))


def g_m_sum(spec: SampledField, cone: ConeParams, tau: float) -> np.ndarray:
    """Unnormalised kernel sum ``sum_eta K(xi - eta) spec(eta) dxi^m``."""
    if not tau > 0:
        raise ParameterError(f"tau={tau} must be positive")
    if spec.rep != FREQUENCY:
        raise StructuralError(f"quadrature needs a frequency field, got {spec.rep}")
    if cone.a <= 0:
        raise ParameterError("the singular kernel needs a > 0")
    g = spec.grid
    if g.N > MAX_QUADRATURE_NODES.get(g.m, 0):
        raise ResourceError(
            f"N={g.N} exceeds the quadrature budget N <= {MAX_QUADRATURE_NODES.get(g.m)} for m={g.m}")
    kern = _gm_kernel(g.N, g.dxi, tau, cone)
    return linear_convolution(spec.values, kern, g.dxi)


def calibrate_gm(reference: SampledField, cone: ConeParams, tau: float) -> complex:
    """Least-squares scalar making the kernel sum reproduce a plus-function."""
    raw = g_m_sum(reference, cone, tau)
    den = np.vdot(raw, raw)
    if den == 0:
        raise ParameterError("reference plus-function is zero")
    return complex(np.vdot(raw, reference.values) / den)


@dataclass
class GmResult:
    f_plus: SampledField
    gamma: complex
    gamma_theory: float
    tau: float


def g_m_quadrature(spec: SampledField, cone: ConeParams, tau: float,
                   gamma: Optional[complex] = None,
                   reference: Optional[SampledField] = None) -> GmResult:
    """Plus part of ``spec`` by direct summation of the singular kernel.

    Parameters
    ----------
    gamma : complex, optional
        Normalising constant.  When omitted it is calibrated on ``reference``
        (or taken from :func:`gm_constant_theory` if no reference is given).
    """
    theory = gm_constant_theory(cone)
    if gamma is None:
        gamma = calibrate_gm(reference, cone, tau) if reference is not None else theory
    raw = g_m_sum(spec, cone, tau)
    logger.debug("g_m quadrature: tau=%.4g gamma=%s theory=%.5g", tau, gamma, theory)
    return GmResult(spec.with_values(gamma * raw), complex(gamma), theory, tau)
