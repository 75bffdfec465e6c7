"""Losses: atomic decay ``eta`` and reflection ``r`` at each cell-wall crossing.

Moments are computed in the frame rotating with the Larmor precession,
keeping only the slowly varying terms (``omega_T >> wT``). In that frame
every light pulse is a pair of independent white-noise vector channels:

* upper ``U = Q(t) (p, -x)``, commutator ``[U_1, U_2] = +i``;
* lower ``L = Q(t) (p, x)``, ordered ``(P_ls, X_ls)``, commutator ``-i``.

Atomic decay adds a channel ``F`` (``+i``). Each pair of wall crossings
between the passes adds a light-noise pulse (``Uf``, ``Lf``), and the last
wall adds ``Ug``/``Lg``. A single-quadrature noise ``Q(t)(0, -f_x)`` splits
exactly into ``(Uf - Lf)/2``: it adds variance but no commutator.

An output quadrature pair is a :class:`Functional`: 2x2 coefficient blocks on
discrete modes (the initial atoms) plus 2x2 kernels on each channel, sampled
at Gauss-Legendre nodes on [0, 1]. Every kernel is a sum of exponentials, so
the quadrature is exact to rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exprel

from .envelopes import ModeEnvelope
from .epr_protocol import FeedbackResult
from .fidelity_metrics import (
    QUBIT_CLASSICAL_LIMIT,
    FidelityReport,
    bloch_average,
    coherent_classical_limit,
    gaussian_average_fidelity,
)
from .gaussian_core import GaussianState, LinearIOMap, epr_variance
from .optimize import ARG_TOL, minimize_1d
from .params import ProtocolParams

N_NODES = 64
BOGOLIUBOV_TOL = 1e-6
PERTURBATIVE_NC = 0.3

_x, _wq = np.polynomial.legendre.leggauss(N_NODES)
NODES = 0.5 * (_x + 1)
WEIGHTS = 0.5 * _wq
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
I2 = np.eye(2)
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


class BogoliubovError(RuntimeError):
    """A decomposition violates ``N_a^2 - N_c^2 = 1``."""


class PerturbativeWarning(UserWarning):
    """``N_c`` is too large for the first-order qubit formula."""


@dataclass(frozen=True)
class Channel:
    name: str
    sign: int = 1


def _exp_integral(a, s0, s1=1.0):
    """int_{s0}^{s1} exp(a t) dt, elementwise and stable for a -> 0."""
    s0 = np.asarray(s0, dtype=float)
    span = s1 - s0
    return np.exp(a * s0) * span * exprel(a * span)


@dataclass(frozen=True)
class Functional:
    """A quadrature pair linear in discrete modes and white-noise channels."""

    discrete: dict = field(default_factory=dict)
    kernels: dict = field(default_factory=dict)

    def __add__(self, other: "Functional") -> "Functional":
        d = dict(self.discrete)
        for k, v in other.discrete.items():
            d[k] = d[k] + v if k in d else v
        kern = dict(self.kernels)
        for k, v in other.kernels.items():
            kern[k] = kern[k] + v if k in kern else v
        return Functional(d, kern)

    def lmul(self, M) -> "Functional":
        """Left-multiply every block by the 2x2 matrix ``M``."""
        M = np.asarray(M, dtype=float)
        return Functional({k: M @ v for k, v in self.discrete.items()},
                          {k: np.einsum("ij,njk->nik", M, v) for k, v in self.kernels.items()})

    def cov(self, other: "Functional | None" = None) -> np.ndarray:
        """Symmetrized cross-covariance with all inputs in vacuum."""
        other = self if other is None else other
        out = np.zeros((2, 2))
        for k, v in self.discrete.items():
            if k in other.discrete:
                out += 0.5 * v @ other.discrete[k].T
        for k, v in self.kernels.items():
            if k in other.kernels:
                out += 0.5 * np.einsum("n,nij,nkj->ik", WEIGHTS, v, other.kernels[k])
        return out

    def commutator(self, other: "Functional | None" = None) -> np.ndarray:
        """Matrix ``C`` with ``[self_i, other_j] = i C_ij``."""
        other = self if other is None else other
        out = np.zeros((2, 2))
        for k, v in self.discrete.items():
            if k in other.discrete:
                out += v @ J2 @ other.discrete[k].T
        for k, v in self.kernels.items():
            if k in other.kernels:
                out += k.sign * np.einsum("n,nij,jl,nkl->ik", WEIGHTS, v, J2, other.kernels[k])
        return out

    def project(self, channel: Channel, envelope) -> np.ndarray:
        """2x2 coefficient on ``int envelope(t) channel(t) dt``."""
        K = self.kernels.get(channel)
        if K is None:
            return np.zeros((2, 2))
        return np.einsum("n,n,nij->ij", WEIGHTS, envelope(NODES), K)


def _split(K: np.ndarray, sign: int) -> tuple[np.ndarray, np.ndarray]:
    """Squared passive and active weights of kernel blocks (..., 2, 2)."""
    if sign < 0:
        K = K[..., ::-1]
    A = 0.5 * (K + J2 @ K @ J2.T)
    B = 0.5 * (K - J2 @ K @ J2.T)
    return A[..., 0, 0] ** 2 + A[..., 0, 1] ** 2, B[..., 0, 0] ** 2 + B[..., 0, 1] ** 2


# ---------------------------------------------------------------------------
# dynamics


def generalized_exponent(params: ProtocolParams | float, eta: float = 0.0,
                         r: float = 0.0) -> float:
    """``wT = eta + kappa2 (1 - 2r)`` (memory sign).

    Accepts a :class:`ProtocolParams` (then the setup sign applies) or plain
    numbers, which allows the boundary ``r = 1/2``.
    """
    if isinstance(params, ProtocolParams):
        return params.wT
    if params < 0 or eta < 0 or not 0 <= r <= 0.5:
        raise ValueError("need kappa2 >= 0, eta >= 0 and 0 <= r <= 1/2")
    return eta + params * (1 - 2 * r)


def _norm(mu: float) -> float:
    """Normalization of the envelope exp(mu t) on [0, 1]."""
    return 1.0 / math.sqrt(float(exprel(2 * mu)))


def _drives(p: ProtocolParams, pulse: str, first_wall: bool = False) -> dict:
    """Channel -> 2x2 coefficient in the rotating-frame atomic drive."""
    k, r, eta = p.kappa, p.r, p.eta
    q = k * math.sqrt(2 * r * (1 - 2 * r)) / 2
    U, L = Channel(f"{pulse}:U", 1), Channel(f"{pulse}:L", -1)
    main, side = (U, L) if p.sign > 0 else (L, U)
    drive = {
        main: k * (1 - r) * I2,
        side: k * r * I2,
        Channel(f"{pulse}:F", 1): math.sqrt(eta) * I2,
        Channel(f"{pulse}:Uf", 1): p.sign * q * I2,
        Channel(f"{pulse}:Lf", -1): -p.sign * q * I2,
    }
    if first_wall and r > 0:
        for ch, leak in ((U, Channel(f"{pulse}:Uh", 1)), (L, Channel(f"{pulse}:Lh", -1))):
            drive[leak] = math.sqrt(r) * drive[ch]
            drive[ch] = math.sqrt(1 - r) * drive[ch]
    return {c: M for c, M in drive.items() if np.any(M)}


def _direct(p: ProtocolParams, pulse: str, first_wall: bool = False) -> dict:
    """Channel -> coefficient of the outgoing light in the measured sideband."""
    r = p.r
    kind = "U" if p.sign > 0 else "L"
    sgn = 1 if kind == "U" else -1
    inner = math.sqrt(1 - r)
    out = {
        Channel(f"{pulse}:{kind}", sgn): inner * math.sqrt(1 - 2 * r) * I2,
        Channel(f"{pulse}:{kind}f", sgn): inner * math.sqrt(2 * r) * I2,
        Channel(f"{pulse}:{kind}g", sgn): math.sqrt(r) * I2,
    }
    if first_wall and r > 0:
        main = Channel(f"{pulse}:{kind}", sgn)
        out[Channel(f"{pulse}:{kind}h", sgn)] = math.sqrt(r) * out[main]
        out[main] = math.sqrt(1 - r) * out[main]
    return {c: M for c, M in out.items() if np.any(M)}


def _pickup(p: ProtocolParams) -> np.ndarray:
    """Atom term in the outgoing light: ``-k~`` (memory) or ``+k~`` (squeezer)."""
    return -p.sign * math.sqrt(1 - p.r) * p.kappa_tilde * I2


def atoms_after(p: ProtocolParams, b0: Functional, pulse: str,
                first_wall: bool = False) -> Functional:
    """Atoms at the end of a pulse: ``b' = -(wT/2) b + drive``."""
    lam = 0.5 * p.wT
    out = b0.lmul(math.exp(-lam) * I2)
    kernels = {c: np.exp(-lam * (1 - NODES))[:, None, None] * M
               for c, M in _drives(p, pulse, first_wall).items()}
    return out + Functional({}, kernels)


def light_mode_out(p: ProtocolParams, b0: Functional, pulse: str, mu: float,
                   first_wall: bool = False) -> Functional:
    """Outgoing light projected on ``N exp(mu t)`` in the coupled sideband.

    Memory: ``(X, P)`` of the upper sideband. Squeezer: ``(P, X)`` of the
    lower sideband, the channel's natural order.
    """
    lam = 0.5 * p.wT
    N = _norm(mu)
    G = _pickup(p)
    out = b0.lmul(G * N * float(_exp_integral(mu - lam, 0.0)))
    tail = N * np.exp(lam * NODES) * _exp_integral(mu - lam, NODES)
    kernels = {c: tail[:, None, None] * (G @ M) for c, M in _drives(p, pulse, first_wall).items()}
    env = N * np.exp(mu * NODES)
    for c, M in _direct(p, pulse, first_wall).items():
        kernels[c] = kernels.get(c, 0) + env[:, None, None] * M
    return out + Functional({}, kernels)


def _atoms0() -> Functional:
    return Functional({"atoms": I2.copy()}, {})


# ---------------------------------------------------------------------------
# memory


@dataclass(frozen=True)
class NoisyIOBundle:
    """Closed-form coefficients of one noisy stage and its full functional.

    ``coefficients`` are named scalars (write-in: ``atoms``, ``us_plus``,
    ``ls_plus``, ``atomic_noise``, ``light_noise``; read-out: ``c1``..``c9``).
    ``output`` is the engine functional of the stage's output pair and
    ``residual_cov`` the covariance of the single-quadrature noise term that
    is not a mode.
    """

    params: ProtocolParams
    stage: str
    coefficients: dict
    output: Functional
    residual_cov: np.ndarray

    @property
    def c(self) -> np.ndarray:
        return np.array([self.coefficients[f"c{i}"] for i in range(1, 10)])

    def added_noise(self) -> np.ndarray:
        return self.output.cov()

    def commutator_defect(self) -> float:
        return float(np.abs(self.output.commutator() - J2).max())


def _rates(p: ProtocolParams) -> tuple[float, float, float]:
    w = p.wT
    if p.sign < 0:
        raise ValueError("memory-stage bundle requires setup='memory'")
    return w, p.kappa, p.kappa_tilde


def _ratio(p: ProtocolParams) -> float:
    """``kappa kappa~ / w`` with its ``w -> 0`` limit."""
    w = p.wT
    if w == 0:
        return 1 / math.sqrt(1 - 2 * p.r) if p.r < 0.5 else 0.0
    return p.kappa * p.kappa_tilde / w


def noisy_write_in(params: ProtocolParams, first_wall: bool = False) -> NoisyIOBundle:
    """Atoms after a noisy write-in.

    ``x_A -> e^{-w/2} x_A + s_w k (1-r) X_us+ + s_w k r P_ls+ + noise`` with
    ``s_w = sqrt((1 - e^{-w})/w)``; the atomic noise mode has weight
    ``s_w sqrt(eta)`` and the single-quadrature light noise weight
    ``s_w k sqrt(2r(1-2r))``.
    """
    p = params
    w, k, _ = _rates(p)
    s_w = math.sqrt(-math.expm1(-w) / w) if w > 0 else 1.0
    coeffs = {
        "atoms": math.exp(-0.5 * w),
        "us_plus": s_w * k * (1 - p.r),
        "ls_plus": s_w * k * p.r,
        "atomic_noise": s_w * math.sqrt(p.eta),
        "light_noise": s_w * k * math.sqrt(2 * p.r * (1 - 2 * p.r)),
    }
    out = atoms_after(p, _atoms0(), "w", first_wall)
    residual = 0.25 * coeffs["light_noise"] ** 2 * I2
    return NoisyIOBundle(p, "write-in", coeffs, out, residual)


def _bracket_norm(w: float) -> float:
    """Norm of ``e^{-w} e^{wt/2} - e^{-wt/2}`` on [0, 1]."""
    if w < 1e-4:
        return math.sqrt(w * w / 3 * (1 - w))
    return math.sqrt(2 * math.exp(-w) * (math.sinh(w) / w - 1))


def read_out_coefficients(params: ProtocolParams) -> np.ndarray:
    """``c1``..``c9`` of the noisy read-out in the generalized minus mode.

    Modes: atoms (c1), ``X_us+`` (c2), ``(P_ls+, X_ls+)`` (c3), ``X_us-``
    (c4), ``(P_ls-, X_ls-)`` (c5), the normalized atomic-noise mode with
    envelope ``e^{-w} e^{wt/2} - e^{-wt/2}`` (c6), last-wall noise in the
    minus mode (c7), between-wall noise in the minus mode (c8), and the
    single-quadrature integral (c9). All plus/minus modes are normalized.
    """
    p = params
    w, k, kt = _rates(p)
    r = p.r
    a = math.sqrt(1 - r)
    rho = _ratio(p)
    e = math.exp(-0.5 * w)
    n_minus = _norm(-0.5 * w)
    c1 = -a * kt * math.sqrt(float(exprel(-w)))
    c2 = a * (1 - r) * rho * e
    c3 = a * r * rho * e
    c4 = a * (math.sqrt(1 - 2 * r) - (1 - r) * rho)
    c5 = -a * r * rho
    if w > 0:
        kd = a * kt * n_minus / w
        c6 = math.sqrt(p.eta) * kd * _bracket_norm(w)
        c9 = k * math.sqrt(2 * r * (1 - 2 * r)) * kd
    else:
        c6 = c9 = 0.0
    c7 = math.sqrt(r)
    c8 = math.sqrt(2 * r * (1 - r))
    return np.array([c1, c2, c3, c4, c5, c6, c7, c8, c9])


def noisy_read_out(params: ProtocolParams) -> NoisyIOBundle:
    """Generalized minus mode of a fresh read-out pulse; atoms are an input."""
    c = read_out_coefficients(params)
    out = light_mode_out(params, _atoms0(), "r", -0.5 * params.wT)
    w = params.wT
    if w > 0:
        var9 = 0.25 * c[8] ** 2 * _bracket_norm(w) ** 2
    else:
        var9 = 0.0
    coeffs = {f"c{i + 1}": float(v) for i, v in enumerate(c)}
    return NoisyIOBundle(params, "read-out", coeffs, out, var9 * I2)


def signal_envelope(params: ProtocolParams):
    """Normalized write-in envelope ``exp(w t/2)`` of the generalized plus mode."""
    mu = 0.5 * params.wT
    N = _norm(mu)
    return lambda t: N * np.exp(mu * np.asarray(t))


def complete_transfer(params: ProtocolParams, first_wall: bool = False) -> Functional:
    """Retrieved ``(X, P)`` after noisy write-in and noisy read-out."""
    atoms = atoms_after(params, _atoms0(), "w", first_wall)
    return light_mode_out(params, atoms, "r", -0.5 * params.wT)


def signal_gain(params: ProtocolParams, transfer: Functional) -> np.ndarray:
    return transfer.project(Channel("w:U", 1), signal_envelope(params))


def noisy_channel(params: ProtocolParams, stage: str = "transfer",
                  first_wall: bool = False) -> LinearIOMap:
    """Single-mode Gaussian channel of one memory stage.

    ``write-in``: signal plus mode -> atoms; ``read-out``: atoms -> read-out
    minus mode; ``transfer``: signal -> retrieved mode. Everything else is
    vacuum and traced into ``Y``.
    """
    if stage == "write-in":
        out = atoms_after(params, _atoms0(), "w", first_wall)
        S = out.project(Channel("w:U", 1), signal_envelope(params))
        labels = ("signal+",), ("atoms",)
    elif stage == "read-out":
        out = light_mode_out(params, _atoms0(), "r", -0.5 * params.wT)
        S = out.discrete["atoms"]
        labels = ("atoms",), ("readout-",)
    elif stage == "transfer":
        out = complete_transfer(params, first_wall)
        S = signal_gain(params, out)
        labels = ("signal+",), ("readout-",)
    else:
        raise ValueError(f"unknown stage {stage!r}")
    Y = out.cov() - 0.5 * S @ S.T
    return LinearIOMap(S, labels[0], labels[1], Y=Y, meta={"params": params, "stage": stage})


@dataclass(frozen=True)
class BogoliubovDecomp:
    """``a_fin^dag = sum k_i a_i^dag + sum k~_j c_j`` grouped per input.

    ``passive`` and ``active`` map input names to ``sqrt(int |k|^2)``;
    ``k1`` is the signed amplitude on the stored signal mode.
    """

    k1: float
    passive: dict
    active: dict

    @property
    def N_a(self) -> float:
        return math.sqrt(sum(v * v for v in self.passive.values()))

    @property
    def N_c(self) -> float:
        return math.sqrt(sum(v * v for v in self.active.values()))

    @property
    def identity_defect(self) -> float:
        return abs(self.N_a ** 2 - self.N_c ** 2 - 1)


def bogoliubov_decompose(transfer: Functional, k1: float) -> BogoliubovDecomp:
    passive, active = {}, {}
    for name, M in transfer.discrete.items():
        pa, ac = _split(M, 1)
        passive[name], active[name] = math.sqrt(pa), math.sqrt(ac)
    for ch, K in transfer.kernels.items():
        pa, ac = _split(K, ch.sign)
        passive[ch.name] = math.sqrt(float(WEIGHTS @ pa))
        active[ch.name] = math.sqrt(float(WEIGHTS @ ac))
    dec = BogoliubovDecomp(k1, passive, active)
    if dec.identity_defect > BOGOLIUBOV_TOL:
        raise BogoliubovError(f"N_a^2 - N_c^2 - 1 = {dec.identity_defect:.3g}")
    if dec.N_c > PERTURBATIVE_NC:
        warnings.warn(f"N_c = {dec.N_c:.3g} exceeds {PERTURBATIVE_NC}; first-order "
                      "qubit fidelity is unreliable", PerturbativeWarning, stacklevel=2)
    return dec


def transfer_decomposition(params: ProtocolParams, first_wall: bool = True) -> BogoliubovDecomp:
    transfer = complete_transfer(params, first_wall)
    gain = signal_gain(params, transfer)
    return bogoliubov_decompose(transfer, float(gain[0, 0]))


def noisy_qubit_fidelity(decomp: BogoliubovDecomp, alpha, beta) -> float:
    """First-order formula ``(|a|^2 - |b|^2 k1 (1 - N_c^2/sqrt(1+N_c^2)))^2/(1+N_c^2)``."""
    a2, b2 = _weights(alpha, beta)
    nc2 = decomp.N_c ** 2
    k = decomp.k1 * (1 - nc2 / math.sqrt(1 + nc2))
    return (a2 - b2 * k) ** 2 / (1 + nc2)


def exact_qubit_fidelity(decomp: BogoliubovDecomp, alpha, beta) -> float:
    """Same overlap with the two-mode squeezed vacuum kept to all orders.

    ``(|a|^2 - |b|^2 k1 (1 - N_c^2/N_a^2))^2 / N_a^2``.
    """
    a2, b2 = _weights(alpha, beta)
    na2 = 1 + decomp.N_c ** 2
    return (a2 - b2 * decomp.k1 * (1 - decomp.N_c ** 2 / na2)) ** 2 / na2


def _weights(alpha, beta):
    a2, b2 = np.abs(alpha) ** 2, np.abs(beta) ** 2
    if not np.allclose(a2 + b2, 1.0, atol=1e-9):
        raise ValueError("qubit amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    return a2, b2


def noisy_qubit_average(params: ProtocolParams, first_wall: bool = True, **grid) -> FidelityReport:
    dec = transfer_decomposition(params, first_wall)
    avg = bloch_average(lambda a, b: noisy_qubit_fidelity(dec, a, b), **grid)
    return FidelityReport(noisy_qubit_fidelity(dec, 0, 1), avg, QUBIT_CLASSICAL_LIMIT)


def transfer_moments(params: ProtocolParams, first_wall: bool = False):
    """Signal gain block and output covariance of the retrieved mode."""
    transfer = complete_transfer(params, first_wall)
    return signal_gain(params, transfer), transfer.cov()


def noisy_coherent_fidelity(params: ProtocolParams, n: float, first_wall: bool = False) -> float:
    """Ensemble-average coherent fidelity through the noisy transfer."""
    gain, cov = transfer_moments(params, first_wall)
    return gaussian_average_fidelity(gain, cov, n)


def noisy_coherent_report(params: ProtocolParams, n: float) -> FidelityReport:
    gain, cov = transfer_moments(params)
    m = math.sqrt(2 * n) * np.array([1.0, 0.0])
    d = (np.eye(2) + gain) @ m
    B = cov + 0.5 * np.eye(2)
    per = math.exp(-0.5 * d @ np.linalg.solve(B, d)) / math.sqrt(np.linalg.det(B))
    return FidelityReport(per, gaussian_average_fidelity(gain, cov, n), coherent_classical_limit(n))


# ---------------------------------------------------------------------------
# squeezer


def squeezer_outputs(params: ProtocolParams) -> tuple[Functional, Functional]:
    """Atoms and the outgoing lower-sideband plus mode ``(p~, x~)``."""
    p = params if params.setup == "squeezer" else params.with_(setup="squeezer")
    atoms = atoms_after(p, _atoms0(), "s")
    light = light_mode_out(p, _atoms0(), "s", -0.5 * p.wT)
    return atoms, light


def squeezer_state(params: ProtocolParams) -> GaussianState:
    """Joint Gaussian state of atoms and ``L~+`` in canonical order."""
    atoms, light = squeezer_outputs(params)
    light = light.lmul(SWAP)
    blocks = [[atoms.cov(), atoms.cov(light)], [light.cov(atoms), light.cov()]]
    cov = np.block(blocks)
    return GaussianState(("atoms", "L~+"), np.zeros(4), 0.5 * (cov + cov.T))


def noisy_epr_variance(params: ProtocolParams) -> float:
    return epr_variance(squeezer_state(params), "atoms", "L~+")


def feedback_variance(state: GaussianState, g: float) -> float:
    """Variance of ``p_A - g x~_L+``."""
    return state.variance(np.array([0.0, 1.0, -g, 0.0]))


def noisy_epr_and_squeezing(params: ProtocolParams, g: float | str = "auto",
                            xtol: float = 1e-10) -> tuple[float, FeedbackResult]:
    """EPR variance and feedback squeezing of the noisy squeezer.

    ``g='auto'`` minimizes the feedback variance over ``g`` numerically.
    """
    state = squeezer_state(params)
    if g == "auto":
        g = minimize_1d(lambda x: feedback_variance(state, x), -1.0, 4.0, xtol).x
    var_x = state.cov[0, 0]
    res = FeedbackResult(float(g), feedback_variance(state, g), float(var_x))
    return epr_variance(state, "atoms", "L~+"), res


def optimal_feedback_gain(params: ProtocolParams) -> float:
    """Regression coefficient ``Cov(p_A, x~)/Var(x~)``; the exact minimizer."""
    c = squeezer_state(params).cov
    return c[1, 2] / c[2, 2]


# ---------------------------------------------------------------------------
# coupling optimization


@dataclass(frozen=True)
class Optimum:
    kappa2: float
    value: float


def optimize_kappa2(objective, lo: float = 0.01, hi: float = 8.0,
                    maximize: bool = False, xtol: float = ARG_TOL) -> Optimum:
    sign = -1.0 if maximize else 1.0
    m = minimize_1d(lambda k: sign * objective(k), lo, hi, xtol)
    return Optimum(m.x, sign * m.value)


def best_epr(eta: float, r: float, **kw) -> Optimum:
    return optimize_kappa2(
        lambda k: noisy_epr_variance(ProtocolParams(k, eta=eta, r=r, setup="squeezer")), **kw)


def best_squeezing(eta: float, r: float, **kw) -> Optimum:
    return optimize_kappa2(
        lambda k: noisy_epr_and_squeezing(ProtocolParams(k, eta=eta, r=r, setup="squeezer"))[1].var_p_fb,
        **kw)


def best_coherent(n: float, eta: float, r: float, **kw) -> Optimum:
    return optimize_kappa2(
        lambda k: noisy_coherent_fidelity(ProtocolParams(k, eta=eta, r=r), n), maximize=True, **kw)


def best_qubit(eta: float, r: float, **kw) -> Optimum:
    def f(k):
        dec = transfer_decomposition(ProtocolParams(k, eta=eta, r=r))
        return qubit_average_closed(dec)
    return optimize_kappa2(f, maximize=True, **kw)


def qubit_average_closed(decomp: BogoliubovDecomp) -> float:
    """Bloch average of :func:`noisy_qubit_fidelity`; ``|alpha|^2`` is uniform."""
    nc2 = decomp.N_c ** 2
    k = decomp.k1 * (1 - nc2 / math.sqrt(1 + nc2))
    return (1 - k + k * k) / 3 / (1 + nc2)


def mode_envelope(params: ProtocolParams, role: str = "input",
                  sideband: str | None = None) -> ModeEnvelope:
    """Generalized envelope ``exp(wT t/2)`` (input) or ``exp(-wT t/2)`` (output).

    For the memory these are the plus and minus modes; with net gain
    (squeezer, ``wT < 0``) the roles of plus and minus swap.
    """
    sb = sideband or ("upper" if params.sign > 0 else "lower")
    sign = 1 if role == "input" else -1
    return ModeEnvelope(sign, params.wT, sb, params.omega_T)
