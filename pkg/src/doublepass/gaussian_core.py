"""Phase-space bookkeeping for Gaussian states and linear input-output maps.

Conventions used throughout the package:

* quadratures are interleaved per mode, ``(x1, p1, x2, p2, ...)``;
* hbar = 1 and the vacuum variance is 1/2, so ``[x, p] = i``;
* a map acts as ``means -> S @ means + d`` and ``cov -> S @ cov @ S.T + Y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PHYSICALITY_TOL = 1e-9
SYMPLECTIC_TOL = 1e-10


@dataclass(frozen=True)
class ModeId:
    label: str
    index: int

    @property
    def x(self) -> int:
        return 2 * self.index

    @property
    def p(self) -> int:
        return 2 * self.index + 1


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        raise ValueError(f"mode labels must be unique, got {labels}")
    return labels


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form for ``n_modes`` interleaved modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class GaussianState:
    modes: tuple[str, ...]
    means: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        modes = _check_labels(self.modes)
        means = np.asarray(self.means, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        if means.shape != (2 * len(modes),) or cov.shape != (2 * len(modes),) * 2:
            raise ValueError("means/cov dimensions do not match the mode list")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ValueError("covariance matrix must be symmetric")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode(self, label: str) -> ModeId:
        try:
            return ModeId(label, self.modes.index(label))
        except ValueError:
            raise ValueError(f"unknown mode {label!r}; state has {self.modes}") from None

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        """Robertson-Schroedinger check: cov + (i/2) Sigma >= 0."""
        m = self.cov + 0.5j * symplectic_form(self.n_modes)
        return bool(np.linalg.eigvalsh(m).min() >= -tol)

    def reduced(self, labels: Sequence[str]) -> "GaussianState":
        idx = []
        for label in labels:
            m = self.mode(label)
            idx += [m.x, m.p]
        return GaussianState(tuple(labels), self.means[idx], self.cov[np.ix_(idx, idx)])

    def variance(self, functional: np.ndarray) -> float:
        """Variance of the quadrature combination ``functional @ r``."""
        f = np.asarray(functional, dtype=float)
        return float(f @ self.cov @ f)

    def displaced(self, label: str, x: float = 0.0, p: float = 0.0) -> "GaussianState":
        m = self.mode(label)
        means = self.means.copy()
        means[m.x] += x
        means[m.p] += p
        return GaussianState(self.modes, means, self.cov)


def make_vacuum(n_modes: int | Sequence[str]) -> GaussianState:
    """Vacuum on ``n_modes`` modes; pass a sequence of labels to name them."""
    if isinstance(n_modes, (int, np.integer)):
        if n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        labels = tuple(f"m{k}" for k in range(n_modes))
    else:
        labels = _check_labels(n_modes)
        if not labels:
            raise ValueError("n_modes must be >= 1")
    n = len(labels)
    return GaussianState(labels, np.zeros(2 * n), 0.5 * np.eye(2 * n))


@dataclass(frozen=True)
class LinearIOMap:
    """Affine Gaussian channel between two ordered mode registers.

    ``in_modes`` and ``out_modes`` have equal length; output labels may differ
    from input labels (e.g. a read-out pulse enters as a plus mode and is
    measured in a minus mode).
    """

    S: np.ndarray
    in_modes: tuple[str, ...]
    out_modes: tuple[str, ...] | None = None
    d: np.ndarray | None = None
    Y: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        in_modes = _check_labels(self.in_modes)
        out_modes = in_modes if self.out_modes is None else _check_labels(self.out_modes)
        dim = 2 * len(in_modes)
        if S.shape != (2 * len(out_modes), dim):
            raise ValueError(f"S has shape {S.shape}, expected {(2 * len(out_modes), dim)}")
        d = np.zeros(S.shape[0]) if self.d is None else np.asarray(self.d, dtype=float)
        Y = np.zeros((S.shape[0],) * 2) if self.Y is None else np.asarray(self.Y, dtype=float)
        if d.shape != (S.shape[0],) or Y.shape != (S.shape[0],) * 2:
            raise ValueError("displacement/noise dimensions do not match S")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "in_modes", in_modes)
        object.__setattr__(self, "out_modes", out_modes)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "Y", 0.5 * (Y + Y.T))

    @property
    def is_lossless(self) -> bool:
        return not np.any(self.Y)

    def row(self, label: str, quadrature: str = "x") -> np.ndarray:
        k = 2 * self.out_modes.index(label) + (quadrature == "p")
        return self.S[k]

    def coefficient(self, out_label: str, in_label: str) -> np.ndarray:
        """2x2 block of ``S`` mapping ``in_label`` quadratures to ``out_label``."""
        i = self.out_modes.index(out_label)
        j = self.in_modes.index(in_label)
        return self.S[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def then(self, other: "LinearIOMap") -> "LinearIOMap":
        """Composition ``other o self`` (apply ``self`` first)."""
        if other.in_modes != self.out_modes:
            raise ValueError(f"cannot compose: {self.out_modes} -> {other.in_modes}")
        return LinearIOMap(
            other.S @ self.S,
            self.in_modes,
            other.out_modes,
            other.S @ self.d + other.d,
            other.S @ self.Y @ other.S.T + other.Y,
        )

    def embed(self, register: Sequence[str]) -> "LinearIOMap":
        """Extend to ``register`` (which must contain ``in_modes``), identity elsewhere."""
        register = _check_labels(register)
        pos = [register.index(m) for m in self.in_modes]
        n = len(register)
        S = np.eye(2 * n)
        d = np.zeros(2 * n)
        Y = np.zeros((2 * n, 2 * n))
        idx = np.array([[2 * k, 2 * k + 1] for k in pos]).reshape(-1)
        S[np.ix_(idx, idx)] = self.S
        d[idx] = self.d
        Y[np.ix_(idx, idx)] = self.Y
        out = list(register)
        for k, label in zip(pos, self.out_modes):
            out[k] = label
        return LinearIOMap(S, register, tuple(out), d, Y)

    def relabel(self, out_modes: Sequence[str]) -> "LinearIOMap":
        return LinearIOMap(self.S, self.in_modes, tuple(out_modes), self.d, self.Y, self.meta)


def identity_map(labels: Sequence[str]) -> LinearIOMap:
    labels = _check_labels(labels)
    return LinearIOMap(np.eye(2 * len(labels)), labels)


def beam_splitter(transmissivity: float, labels: Sequence[str] = ("a", "b")) -> LinearIOMap:
    """Real beam splitter with amplitude transmission ``sqrt(transmissivity)``."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    t = np.sqrt(transmissivity)
    s = np.sqrt(1.0 - transmissivity)
    S = np.kron(np.array([[t, s], [-s, t]]), np.eye(2))
    return LinearIOMap(S, tuple(labels))


def loss_channel(transmissivity: float, label: str = "a") -> LinearIOMap:
    """Pure-loss channel: vacuum admixture traced into ``Y``."""
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    S = np.sqrt(transmissivity) * np.eye(2)
    Y = 0.5 * (1.0 - transmissivity) * np.eye(2)
    return LinearIOMap(S, (label,), Y=Y)


def apply_map(state: GaussianState, io_map: LinearIOMap) -> GaussianState:
    if state.modes != io_map.in_modes:
        if len(state.modes) != len(io_map.in_modes):
            raise ValueError(
                f"dimension mismatch: state has {state.n_modes} modes, "
                f"map expects {len(io_map.in_modes)}"
            )
        raise ValueError(f"mode mismatch: state {state.modes} vs map {io_map.in_modes}")
    S = io_map.S
    return GaussianState(
        io_map.out_modes,
        S @ state.means + io_map.d,
        S @ state.cov @ S.T + io_map.Y,
    )


def symplectic_defect(io_map: LinearIOMap) -> float:
    """max |S Sigma S^T - Sigma|; zero for a symplectic transfer matrix."""
    S = io_map.S
    sigma = symplectic_form(S.shape[0] // 2)
    return float(np.abs(S @ sigma @ S.T - sigma).max())


def physicality_margin(io_map: LinearIOMap) -> float:
    """Smallest eigenvalue of ``Y + (i/2)(Sigma - S Sigma S^T)``."""
    S = io_map.S
    sigma = symplectic_form(S.shape[0] // 2)
    m = io_map.Y + 0.5j * (sigma - S @ sigma @ S.T)
    return float(np.linalg.eigvalsh(m).min())


def check_symplectic(io_map: LinearIOMap, tol: float = SYMPLECTIC_TOL,
                     physicality_tol: float = PHYSICALITY_TOL) -> bool:
    """Validity of a map as a Gaussian channel.

    Lossless maps (``Y == 0``) must have a symplectic ``S`` to ``tol``; maps
    carrying added noise must satisfy the channel physicality condition.
    """
    if io_map.S.shape[0] != io_map.S.shape[1]:
        return False
    if io_map.is_lossless:
        return symplectic_defect(io_map) <= tol
    return physicality_margin(io_map) >= -physicality_tol


def epr_variance(state: GaussianState, mode_a: str, mode_b: str) -> float:
    """EPR variance of the pair ``(x_a - p_b)/sqrt2``, ``(p_a - x_b)/sqrt2``.

    The mean of the two variances in vacuum units (vacuum variance 1/2), so
    the two-mode vacuum gives 1 and values below 1 certify entanglement.
    """
    a = state.mode(mode_a)
    b = state.mode(mode_b)
    f1 = np.zeros(2 * state.n_modes)
    f2 = np.zeros(2 * state.n_modes)
    f1[a.x], f1[b.p] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    f2[a.p], f2[b.x] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    return state.variance(f1) + state.variance(f2)
