"""Overlaps, ensemble averages and classical benchmarks.

Two input classes are used. Coherent states have amplitudes drawn from a
Gaussian of width ``n`` (mean photon number ``n``, so each mean quadrature
has variance ``n``). Qubits are ``alpha|0> + beta|1>`` on the Bloch sphere
with ``alpha = cos(theta/2)`` and ``beta = sin(theta/2) exp(i phi)``.

A retrieved signal carries a minus sign, ``x_out ~ -x_in``. All overlaps
compare against the sign-flipped target, as the protocol intends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gaussian_core import GaussianState, LinearIOMap, apply_map, make_vacuum

QUBIT_CLASSICAL_LIMIT = 2.0 / 3.0
BLOCH_N_THETA = 2048
BLOCH_N_PHI = 128


def coherent_classical_limit(n: float) -> float:
    """Best measure-and-prepare average fidelity for the width-``n`` ensemble."""
    return (2 * n + 1) / (4 * n + 1)


@dataclass(frozen=True)
class FidelityReport:
    per_state: float
    average: float
    classical_limit: float

    @property
    def beats_classical(self) -> bool:
        return self.average > self.classical_limit


def coherent_overlap(mean_in, mean_out, var_out) -> float:
    """Overlap of the coherent target ``-mean_in`` with a Gaussian output.

    ``var_out`` holds the output variances (x, p); vacuum is 1/2.
    """
    mi = np.asarray(mean_in, dtype=float)
    mo = np.asarray(mean_out, dtype=float)
    v = np.asarray(var_out, dtype=float)
    if np.any(v <= 0):
        raise ValueError("variances must be positive")
    den = 1 + 2 * v
    return float(2 / math.sqrt(den[0] * den[1]) * math.exp(-np.sum((mi + mo) ** 2 / den)))


def gaussian_average_fidelity(gain: np.ndarray, cov: np.ndarray, n: float,
                              offset=None) -> float:
    """Average overlap over the coherent ensemble for a Gaussian channel.

    The output mean is ``gain @ m + offset`` and its covariance ``cov`` for an
    input mean ``m ~ N(0, n I)``. Averaging ``exp(-d.A.d/2)/sqrt(det(cov+I/2))``
    with ``d = (I + gain) m + offset`` and ``A = (cov + I/2)^-1`` gives
    ``det(B)^(-1/2) exp(-offset.B^-1.offset/2)`` with
    ``B = cov + I/2 + n (I + gain)(I + gain)^T``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    M = np.eye(2) + np.asarray(gain, dtype=float)
    B = np.asarray(cov, dtype=float) + 0.5 * np.eye(2) + n * M @ M.T
    f = 1 / math.sqrt(np.linalg.det(B))
    if offset is not None:
        d = np.asarray(offset, dtype=float)
        f *= math.exp(-0.5 * d @ np.linalg.solve(B, d))
    return float(f)


def _signal_channel(io_map: LinearIOMap, signal_in: str, signal_out: str,
                    state: GaussianState | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gain block, output covariance and offset of the signal through a map.

    All other inputs are vacuum unless ``state`` supplies them.
    """
    if state is None:
        state = make_vacuum(io_map.in_modes)
    out = apply_map(state, io_map)
    k = 2 * io_map.out_modes.index(signal_out)
    cov = out.cov[k:k + 2, k:k + 2]
    return io_map.coefficient(signal_out, signal_in), cov, out.means[k:k + 2]


def map_coherent_fidelity(io_map: LinearIOMap, n: float, signal_in: str = "signal+",
                          signal_out: str = "readout-") -> float:
    """Ensemble-average coherent fidelity of a composed transfer map."""
    gain, cov, offset = _signal_channel(io_map, signal_in, signal_out)
    return gaussian_average_fidelity(gain, cov, n, offset)


def signal_amplitude(io_map: LinearIOMap, signal_in: str = "signal+",
                     signal_out: str = "readout-") -> float:
    """Passive single-photon amplitude ``k1`` of a phase-insensitive transfer."""
    block = io_map.coefficient(signal_out, signal_in)
    if not np.allclose(block, block[0, 0] * np.eye(2), atol=1e-12):
        raise ValueError("signal transfer is not phase insensitive")
    return float(block[0, 0])


def qubit_fidelity_from_amplitude(k1: float, alpha: complex, beta: complex) -> float:
    """``(|alpha|^2 - k1 |beta|^2)^2``: overlap with the environment left in vacuum."""
    a2, b2 = _qubit_weights(alpha, beta)
    return (a2 - k1 * b2) ** 2


def map_qubit_average(io_map: LinearIOMap, signal_in: str = "signal+",
                      signal_out: str = "readout-") -> float:
    """Exact Bloch average of the qubit overlap for a passive transfer.

    ``|alpha|^2`` is uniform on [0, 1] over the sphere, so the average of
    ``(c - k1 (1 - c))^2`` is ``(1 - k1 + k1^2)/3``.
    """
    k1 = signal_amplitude(io_map, signal_in, signal_out)
    return (1 - k1 + k1 * k1) / 3


def _qubit_weights(alpha, beta):
    a2, b2 = np.abs(alpha) ** 2, np.abs(beta) ** 2
    if not np.allclose(a2 + b2, 1.0, atol=1e-9):
        raise ValueError("qubit amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    return a2, b2


def average_coherent(n: float, kappa2: float) -> FidelityReport:
    """Ideal memory: ``1/(1 + exp(-2 kappa2) n)``.

    ``per_state`` is the fidelity of a state with mean photon number ``n``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    e = math.exp(-2 * kappa2)
    return FidelityReport(math.exp(-n * e), 1 / (1 + e * n), coherent_classical_limit(n))


def qubit_overlap(alpha: complex, beta: complex, kappa2: float) -> float:
    """Ideal memory: ``(|alpha|^2 + (1 - exp(-kappa2)) |beta|^2)^2``."""
    return qubit_fidelity_from_amplitude(math.expm1(-kappa2), alpha, beta)


def average_qubit(kappa2: float) -> FidelityReport:
    """Ideal memory: ``1 - exp(-kappa2) + exp(-2 kappa2)/3``.

    ``per_state`` is the single-photon fidelity, the worst case.
    """
    e = math.exp(-kappa2)
    return FidelityReport(qubit_overlap(0, 1, kappa2), 1 - e + e * e / 3,
                          QUBIT_CLASSICAL_LIMIT)


def bloch_average(f: Callable[[complex, complex], float], n_theta: int = BLOCH_N_THETA,
                  n_phi: int = BLOCH_N_PHI) -> float:
    """Average of ``f(alpha, beta)`` over the Bloch sphere, trapezoid rule.

    The measure is ``sin(theta) dtheta dphi / 4 pi``. ``theta`` takes
    ``n_theta + 1`` nodes including both poles, ``phi`` is periodic with
    ``n_phi`` nodes; the weights are normalized to sum to one. ``f`` is first tried on whole arrays and evaluated
    pointwise if that fails.
    """
    if n_theta < 2 or n_phi < 1:
        raise ValueError("grid too small")
    theta = np.linspace(0.0, math.pi, n_theta + 1)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    wt = np.full(n_theta + 1, math.pi / n_theta)
    wt[[0, -1]] *= 0.5
    wt *= np.sin(theta)
    alpha = np.cos(theta / 2)[:, None] * np.ones(n_phi)
    beta = np.sin(theta / 2)[:, None] * np.exp(1j * phi)
    try:
        values = np.broadcast_to(np.asarray(f(alpha, beta), dtype=float), alpha.shape)
    except (TypeError, ValueError):
        values = np.array([[f(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(alpha, beta)])
    # normalizing by the weight sum makes constants exact
    return float(wt @ values.mean(axis=1) / wt.sum())
