"""Closed-form maps of the active (squeezer) geometry, EPR modes and feedback.

With ``C = exp(kappa2/2) = cosh z`` and ``S = sqrt(exp(kappa2) - 1) = sinh z``
the atoms and the lower-sideband modes of one pulse transform as a two-mode
squeezer:

    x_A -> C x_A + S p~_L-        p~_L+ <- S x_A + C p~_L-
    p_A -> C p_A + S x~_L-        x~_L+ <- S p_A + C x~_L-
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian_core import GaussianState, LinearIOMap, apply_map, epr_variance, make_vacuum
from .optimize import minimize_1d

VACUUM_VARIANCE = 0.5


def squeeze_amplitudes(kappa2: float) -> tuple[float, float]:
    """``(cosh z, sinh z)`` with ``z = arccosh(exp(kappa2/2))``."""
    if kappa2 < 0:
        raise ValueError("kappa2 must be >= 0")
    return math.exp(0.5 * kappa2), math.sqrt(math.expm1(kappa2))


def squeeze_parameter(kappa2: float) -> float:
    return math.asinh(squeeze_amplitudes(kappa2)[1])


def squeezer_maps(kappa2: float, light_in: str = "L~-", light_out: str = "L~+") -> LinearIOMap:
    """Joint active map ``(atoms, L~-) -> (atoms, L~+)``."""
    C, S = squeeze_amplitudes(kappa2)
    M = np.array([
        [C, 0, 0, S],
        [0, C, S, 0],
        [0, S, C, 0],
        [S, 0, 0, C],
    ], dtype=float)
    return LinearIOMap(M, ("atoms", light_in), ("atoms", light_out), meta={"kappa2": kappa2})


def squeezed_state(kappa2: float) -> GaussianState:
    """Atoms and the outgoing ``L~+`` mode after one pulse on vacuum inputs."""
    return apply_map(make_vacuum(("atoms", "L~-")), squeezer_maps(kappa2))


def epr_variances(kappa2: float) -> tuple[float, float]:
    """``(exp(-2z), exp(2z))`` in vacuum units: Var(x1), Var(p1)."""
    C, S = squeeze_amplitudes(kappa2)
    return (C - S) ** 2, (C + S) ** 2


def epr_variance_of(kappa2: float) -> float:
    """Delta_EPR computed from the propagated covariance, not the formula."""
    return epr_variance(squeezed_state(kappa2), "atoms", "L~+")


@dataclass(frozen=True)
class EprModes:
    """EPR combinations as rows over ``(x_A, p_A, x~, p~)``."""

    x1: np.ndarray
    p1: np.ndarray
    x2: np.ndarray
    p2: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.vstack([self.x1, self.p1, self.x2, self.p2])


def epr_modes() -> EprModes:
    h = 1 / math.sqrt(2)
    return EprModes(
        x1=np.array([h, 0, 0, -h]),
        p1=np.array([0, h, h, 0]),
        x2=np.array([h, 0, 0, h]),
        p2=np.array([0, h, -h, 0]),
    )


@dataclass(frozen=True)
class FeedbackResult:
    g: float
    var_p_fb: float
    var_x: float

    @property
    def uncertainty_product(self) -> float:
        return self.var_p_fb * self.var_x

    @property
    def squeezing_db(self) -> float:
        return squeezing_db(self.var_p_fb)


def squeezing_db(variance: float) -> float:
    """``10 log10(variance / vacuum)``; negative means squeezed."""
    return 10 * math.log10(variance / VACUUM_VARIANCE)


def feedback_variance(kappa2: float, g: float) -> float:
    C, S = squeeze_amplitudes(kappa2)
    return 0.5 * (C - g * S) ** 2 + 0.5 * (S - g * C) ** 2


def spin_squeeze(kappa2: float, g: float | None = None) -> FeedbackResult:
    """Displace ``p_A`` by ``-g`` times the measured ``x~_L+``.

    ``g=None`` selects :func:`optimal_gain`. The conjugate variance of
    ``x_A`` is untouched by the feedback.
    """
    if g is None:
        g = optimal_gain(kappa2)
    C, S = squeeze_amplitudes(kappa2)
    return FeedbackResult(g, feedback_variance(kappa2, g), 0.5 * (C * C + S * S))


def optimal_gain(kappa2: float) -> float:
    """Closed-form minimizer ``2CS/(C^2 + S^2)``; 0 at ``kappa2 = 0``."""
    C, S = squeeze_amplitudes(kappa2)
    return 2 * C * S / (C * C + S * S)


def optimal_gain_numeric(kappa2: float, xtol: float = 1e-12) -> float:
    return minimize_1d(lambda g: feedback_variance(kappa2, g), -0.5, 2.0, xtol).x
