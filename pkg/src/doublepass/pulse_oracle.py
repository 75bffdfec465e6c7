"""Discretized Maxwell-Bloch integration of the double-pass scheme.

The pulse is cut into ``N`` slices of duration ``dt = T/N``. Each slice is a
bosonic mode ``(X_k, P_k)`` and meets the atoms twice:

1. first pass, ``H = g p_A P_k``: ``x_A += g P_k`` and ``X_k += g p_A``;
2. between passes the slice crosses two cell walls (amplitude ``sqrt(1-2r)``);
3. second pass with the reduced coupling ``g~``: ``p_A -= s g~ X_j`` and
   ``P_j -= s g~ x_A`` where ``s = +1`` for the memory and ``-1`` for the
   squeezer geometry. The slice returns ``loop_delay_segments`` steps after
   its first pass (0: later in the same step, which is the causal short-loop
   limit);
4. the outgoing slice crosses the last wall (amplitude ``sqrt(1-r)``).

Larmor precession is applied as two half-step rotations around the kicks and
atomic decay as an exact per-step damping with a fresh vacuum ancilla. Every
sub-step is an exact Gaussian channel, so the only discretization error is
physical (finite ``N`` and finite ``omega_T``). Nothing is sampled: each
vacuum ancilla is a column of the transfer rows and is traced out at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .envelopes import ModeEnvelope
from .gaussian_core import LinearIOMap
from .params import ProtocolParams

# Above this the dense map would need more than ~1 GB.
MAX_DENSE_SEGMENTS = 3000


@dataclass
class SliceLedger:
    """Transfer rows of one oracle run.

    Columns are grouped in ``layout``: ``atoms`` (2), ``light`` (2N slice
    quadratures), and one block per vacuum-ancilla family (``atomic``,
    ``reflection``, ``first_wall``, ``last_wall``). Rows exist for the atoms
    and for every requested probe (an output light functional).
    """

    params: ProtocolParams
    layout: dict[str, slice]
    atoms: np.ndarray
    probes: dict[str, np.ndarray]
    probe_functionals: dict[str, np.ndarray]
    first_pass_p_defect: float
    slices: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_segments(self) -> int:
        return self.params.n_segments

    def rows(self, name: str) -> np.ndarray:
        return self.atoms if name == "atoms" else self.probes[name]

    def light_coefficients(self, name: str, functionals: np.ndarray) -> np.ndarray:
        """Coefficients of output ``name`` on input light functionals (k, 2N)."""
        return self.rows(name)[:, self.layout["light"]] @ np.atleast_2d(functionals).T

    def atom_coefficients(self, name: str) -> np.ndarray:
        return self.rows(name)[:, self.layout["atoms"]]

    def noise_cov(self, name_a: str, name_b: str | None = None,
                  groups: tuple[str, ...] | None = None) -> np.ndarray:
        """Covariance added by the traced vacuum ancillas (2x2)."""
        a = self.rows(name_a)
        b = a if name_b is None else self.rows(name_b)
        keys = groups or tuple(k for k in self.layout if k not in ("atoms", "light"))
        out = np.zeros((2, 2))
        for key in keys:
            sl = self.layout.get(key)
            if sl is not None:
                out += 0.5 * a[:, sl] @ b[:, sl].T
        return out

    def light_residual(self, name: str, functionals: np.ndarray) -> np.ndarray:
        """Norm of the input-light part of each row outside the given span."""
        rows = self.rows(name)[:, self.layout["light"]]
        F = np.atleast_2d(functionals)
        q, _ = np.linalg.qr(F.T)
        rest = rows - (rows @ q) @ q.T
        return np.linalg.norm(rest, axis=1)


def _unit(dim: int, k: int) -> np.ndarray:
    v = np.zeros(dim)
    v[k] = 1.0
    return v


def run(params: ProtocolParams, probes: dict[str, np.ndarray] | None = None,
        keep_slices: bool = False) -> SliceLedger:
    """Integrate one pulse and return the transfer rows.

    ``probes`` maps a name to a (2, 2N) output-light functional (for example
    ``ModeEnvelope.functionals``); its rows are accumulated on the fly so the
    full map never has to be stored. ``keep_slices`` stores every output
    slice row as well (memory ~ N^2).
    """
    N = params.n_segments
    if keep_slices and N > MAX_DENSE_SEGMENTS:
        raise ValueError(f"dense output limited to n_segments <= {MAX_DENSE_SEGMENTS}")
    probes = dict(probes or {})
    for name, f in probes.items():
        if np.shape(f) != (2, 2 * N):
            raise ValueError(f"probe {name!r} must have shape (2, {2 * N})")

    r, eta = params.r, params.eta
    layout = {"atoms": slice(0, 2), "light": slice(2, 2 + 2 * N)}
    D = 2 + 2 * N
    for group, on in (("atomic", eta > 0), ("reflection", r > 0),
                      ("first_wall", params.first_wall and r > 0)):
        if on:
            layout[group] = slice(D, D + 2 * N)
            D += 2 * N

    dt = 1.0 / N
    sign = params.sign
    g = params.kappa * math.sqrt(dt)
    g2 = params.kappa_tilde * math.sqrt(dt)
    half = 0.5 * params.omega_T * dt
    rot = np.array([[math.cos(half), math.sin(half)], [-math.sin(half), math.cos(half)]])
    damp = math.exp(-0.5 * eta * dt)
    kick_noise = math.sqrt(-math.expm1(-eta * dt))
    between = math.sqrt(1 - 2 * r)
    between_noise = math.sqrt(2 * r)
    delay = params.loop_delay_segments

    names = list(probes)
    pm = np.array([probes[n] for n in names]).reshape(-1, 2 * N) if names else None
    acc = np.zeros((pm.shape[0], D)) if names else None
    slices = np.zeros((2 * N, D)) if keep_slices else None

    A = np.zeros((2, D))
    A[0, 0] = A[1, 1] = 1.0
    live: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    defect = 0.0

    if params.simultaneous_passes:
        # ablation: both passes integrated jointly, no causal ordering
        gen = np.zeros((4, 4))  # (x_A, p_A, X, P)
        gen[0, 3] = g
        gen[2, 1] = g
        gen[1, 2] = -sign * g2
        gen[3, 0] = -sign * g2
        joint = expm(gen)

    def finish(j: int, X: np.ndarray, P: np.ndarray) -> None:
        if keep_slices:
            slices[2 * j] = X
            slices[2 * j + 1] = P
        if acc is not None:
            acc[:] += np.outer(pm[:, 2 * j], X) + np.outer(pm[:, 2 * j + 1], P)

    def second_pass(j: int) -> None:
        X, P = live.pop(j)
        A[1] -= sign * g2 * X
        P = P - sign * g2 * A[0]
        finish(j, X, P)

    for k in range(N):
        A[:] = rot @ A
        X = _unit(D, 2 + 2 * k)
        P = _unit(D, 3 + 2 * k)
        if "first_wall" in layout:
            base = layout["first_wall"].start
            X = math.sqrt(1 - r) * X + math.sqrt(r) * _unit(D, base + 2 * k)
            P = math.sqrt(1 - r) * P + math.sqrt(r) * _unit(D, base + 2 * k + 1)
        P_in = P
        if params.simultaneous_passes:
            rows = joint @ np.vstack([A, X, P])
            A[:] = rows[:2]
            X, P = rows[2], rows[3]
            defect = max(defect, float(np.abs(P - P_in).max()))
            finish(k, X, P)
        else:
            defect = max(defect, float(np.abs(P - P_in).max()))
            A[0] += g * P
            X = X + g * A[1]
            if r > 0:
                base = layout["reflection"].start
                X = between * X + between_noise * _unit(D, base + 2 * k)
                P = between * P + between_noise * _unit(D, base + 2 * k + 1)
            live[k] = (X, P)
            if k - delay >= 0:
                second_pass(k - delay)
        if eta > 0:
            A *= damp
            base = layout["atomic"].start
            A[0, base + 2 * k] = kick_noise
            A[1, base + 2 * k + 1] = kick_noise
        A[:] = rot @ A
    for j in sorted(live):
        second_pass(j)

    # last wall crossing: scale outgoing light, add its ancillas as columns
    out = math.sqrt(1 - r)
    layout["last_wall"] = slice(D, D + 2 * N)
    wall = math.sqrt(r)
    atoms = np.hstack([A, np.zeros((2, 2 * N))])
    probe_rows = {}
    for i, name in enumerate(names):
        rows = acc[2 * i:2 * i + 2]
        probe_rows[name] = np.hstack([out * rows, wall * probes[name]])
    if keep_slices:
        slices = np.hstack([out * slices, wall * np.eye(2 * N)])
    return SliceLedger(params, layout, atoms, probe_rows, probes, defect, slices)


def _dense_map(params: ProtocolParams) -> LinearIOMap:
    led = run(params, keep_slices=True)
    N = params.n_segments
    rows = np.vstack([led.atoms, led.slices])
    core = slice(0, 2 + 2 * N)
    S = rows[:, core]
    noise = rows[:, 2 + 2 * N:]
    labels = ("atoms",) + tuple(f"L[{k}]" for k in range(N))
    return LinearIOMap(S, labels, Y=0.5 * noise @ noise.T,
                       meta={"params": params, "first_pass_p_defect": led.first_pass_p_defect})


def integrate_ideal(params: ProtocolParams) -> LinearIOMap:
    """Composed lossless map over ``atoms`` and the ``N`` pulse slices."""
    if not params.is_lossless:
        raise ValueError("integrate_ideal requires eta = r = 0; use integrate_noisy")
    return _dense_map(params)


def integrate_noisy(params: ProtocolParams) -> LinearIOMap:
    """Composed map with atomic decay and wall losses traced into ``Y``."""
    return _dense_map(params)


@dataclass(frozen=True)
class ModeProjection:
    """A map restricted to the basis ``(atoms, light mode)``.

    ``matrix`` rows are (x_A, p_A, x_out, p_out) and columns
    (x_A, p_A, x_in, p_in); ``leakage`` is the norm of each row's input-light
    part outside the input mode; ``noise`` is the 4x4 added covariance.
    """

    matrix: np.ndarray
    leakage: np.ndarray
    noise: np.ndarray

    @property
    def atoms_self(self) -> np.ndarray:
        return self.matrix[:2, :2]

    @property
    def atoms_from_light(self) -> np.ndarray:
        return self.matrix[:2, 2:]

    @property
    def light_from_atoms(self) -> np.ndarray:
        return self.matrix[2:, :2]

    @property
    def light_self(self) -> np.ndarray:
        return self.matrix[2:, 2:]


def _basis(n: int, envelope: ModeEnvelope) -> np.ndarray:
    B = np.zeros((2 + 2 * n, 4))
    B[0, 0] = B[1, 1] = 1.0
    B[2:, 2:] = envelope.functionals(n).T
    return B


def project_mode(io_map: LinearIOMap, envelope: ModeEnvelope,
                 output_envelope: ModeEnvelope | None = None) -> ModeProjection:
    """Read a dense oracle map in the basis {atoms, envelope mode, complement}."""
    n = len(io_map.in_modes) - 1
    f = envelope.functionals(n)
    if not np.isclose(np.sum(f[0] ** 2), 1.0, atol=1e-9):
        raise ValueError("envelope functionals are not normalized")
    B_in = _basis(n, envelope)
    B_out = _basis(n, output_envelope or envelope)
    rows = B_out.T @ io_map.S
    matrix = rows @ B_in
    light = rows[:, 2:]
    q = B_in[2:, 2:]
    leakage = np.linalg.norm(light - (light @ q) @ q.T, axis=1)
    return ModeProjection(matrix, leakage, B_out.T @ io_map.Y @ B_out)


def project_run(params: ProtocolParams, envelope: ModeEnvelope,
                output_envelope: ModeEnvelope | None = None) -> ModeProjection:
    """Same as :func:`project_mode` but streamed, for large ``n_segments``."""
    n = params.n_segments
    out_env = output_envelope or envelope
    led = run(params, probes={"out": out_env.functionals(n)})
    fin = envelope.functionals(n)
    rows = np.vstack([led.atoms, led.probes["out"]])
    light = rows[:, led.layout["light"]]
    matrix = np.hstack([rows[:, :2], light @ fin.T])
    leakage = np.linalg.norm(light - (light @ fin.T) @ fin, axis=1)
    noise_cols = rows[:, 2 + 2 * n:]
    return ModeProjection(matrix, leakage, 0.5 * noise_cols @ noise_cols.T)


def dump_csv(io_map: LinearIOMap, path) -> None:
    """Row-major dump of ``S``; the header names each quadrature column."""
    header = ",".join(f"{m}.{q}" for m in io_map.in_modes for q in "xp")
    with open(path, "w") as fh:
        fh.write("# rows: " + ",".join(f"{m}.{q}" for m in io_map.out_modes for q in "xp") + "\n")
        fh.write(header + "\n")
        for row in io_map.S:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
