"""Temporal light modes: exponential envelopes at the upper or lower sideband.

A light slice ``k`` of the discretized pulse carries quadratures
``(X_k, P_k)``; in a functional vector they sit at columns ``2k`` and
``2k+1``. In the frame co-rotating with the Larmor precession (phase
``theta = Omega t``) the two sidebands are

    upper:  x = cos(theta) P + sin(theta) X,   p = sin(theta) P - cos(theta) X
    lower:  x = sin(theta) P + cos(theta) X,   p = cos(theta) P - sin(theta) X

weighted by the slowly varying envelope ``exp(sign * rate * t / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import exprel

from .params import DEFAULT_OMEGA_T

SIDEBANDS = ("upper", "lower")


def exp_integral(rate: float) -> float:
    """int_0^1 exp(rate t) dt, stable at rate -> 0."""
    return float(exprel(rate))


@dataclass(frozen=True)
class ModeEnvelope:
    exponent_sign: int
    rate: float
    sideband: str = "upper"
    omega_T: float = DEFAULT_OMEGA_T

    def __post_init__(self):
        if self.exponent_sign not in (1, -1):
            raise ValueError("exponent_sign must be +1 or -1")
        if self.sideband not in SIDEBANDS:
            raise ValueError(f"sideband must be one of {SIDEBANDS}")

    @property
    def exponent(self) -> float:
        return self.exponent_sign * self.rate

    @property
    def norm(self) -> float:
        """Continuum prefactor making ``norm^2 int_0^1 e^{+-wt} dt = 1``."""
        return 1.0 / math.sqrt(exp_integral(self.exponent))

    def __call__(self, t):
        return self.norm * np.exp(0.5 * self.exponent * np.asarray(t, dtype=float))

    def functionals(self, n_segments: int) -> np.ndarray:
        """(2, 2N) array: rows give the mode's x and p on slice quadratures.

        Slices are sampled at their midpoints and the weights renormalized so
        the squared weights sum to one.
        """
        t = (np.arange(n_segments) + 0.5) / n_segments
        w = np.exp(0.5 * self.exponent * t)
        w /= np.linalg.norm(w)
        c = np.cos(self.omega_T * t)
        s = np.sin(self.omega_T * t)
        out = np.zeros((2, 2 * n_segments))
        if self.sideband == "upper":
            out[0, 0::2], out[0, 1::2] = w * s, w * c
            out[1, 0::2], out[1, 1::2] = -w * c, w * s
        else:
            out[0, 0::2], out[0, 1::2] = w * c, w * s
            out[1, 0::2], out[1, 1::2] = -w * s, w * c
        return out


def plus_mode(rate: float, sideband: str = "upper", omega_T: float = DEFAULT_OMEGA_T) -> ModeEnvelope:
    return ModeEnvelope(1, rate, sideband, omega_T)


def minus_mode(rate: float, sideband: str = "upper", omega_T: float = DEFAULT_OMEGA_T) -> ModeEnvelope:
    return ModeEnvelope(-1, rate, sideband, omega_T)


def envelope_overlap(a: ModeEnvelope, b: ModeEnvelope) -> float:
    """Continuum overlap of two envelopes on the same sideband."""
    if a.sideband != b.sideband:
        return 0.0
    return a.norm * b.norm * exp_integral(0.5 * (a.exponent + b.exponent))
