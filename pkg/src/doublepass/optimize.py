"""Bounded one-dimensional minimization for smooth, unimodal objectives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from scipy.optimize import minimize_scalar

ARG_TOL = 1e-6


@dataclass(frozen=True)
class Minimum:
    x: float
    value: float
    n_evals: int


def minimize_1d(f: Callable[[float], float], lo: float, hi: float,
                xtol: float = ARG_TOL) -> Minimum:
    """Golden-section search with parabolic acceleration (Brent) on [lo, hi]."""
    if not hi > lo:
        raise ValueError("empty search interval")
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    return Minimum(float(res.x), float(res.fun), int(res.nfev))
