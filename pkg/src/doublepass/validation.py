"""Oracle-versus-closed-form and invariant checks behind ``doublepass validate``.

Each check reduces to one number, the worst deviation over its grid, and a
tolerance. Closed-form maps are looked up through their modules at call time,
so a patched map is what gets validated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import epr_protocol, fidelity_metrics, memory_protocol, noise_model
from .envelopes import ModeEnvelope
from .gaussian_core import physicality_margin, symplectic_defect
from .params import DEFAULT_OMEGA_T, ProtocolParams
from .pulse_oracle import project_run, run

LEVELS = {
    "fast": {"n_segments": 1000, "omega_T": DEFAULT_OMEGA_T, "kappa2": (1.0,),
             "oracle_tol": 1e-2, "noisy_tol": 1e-2},
    "full": {"n_segments": 8000, "omega_T": 2 * DEFAULT_OMEGA_T, "kappa2": (0.5, 1.0, 2.0),
             "oracle_tol": 5e-3, "noisy_tol": 2e-3},
}
KAPPA2_GRID = (0.1, 0.5, 1.0, 2.0, 3.0, 5.0)
PHOTON_NUMBERS = (4, 8, 20)
NOISE_GRID = ((0.0, 0.0), (0.075, 0.075), (0.1, 0.1), (0.25, 0.2))


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


def _max(values) -> float:
    return float(max(values))


def closed_form_fidelity_error(kappa2_grid=KAPPA2_GRID, photons=PHOTON_NUMBERS) -> float:
    """Composed-map fidelities against the ideal closed forms."""
    errs = []
    for k in kappa2_grid:
        m = memory_protocol.complete_transfer_map(k)
        for n in photons:
            errs.append(abs(fidelity_metrics.map_coherent_fidelity(m, n)
                            - 1 / (1 + math.exp(-2 * k) * n)))
        e = math.exp(-k)
        errs.append(abs(fidelity_metrics.map_qubit_average(m) - (1 - e + e * e / 3)))
    return _max(errs)


def lossless_maps(kappa2: float):
    yield memory_protocol.write_in_map(kappa2)
    yield memory_protocol.read_out_map(kappa2)
    yield memory_protocol.complete_transfer_map(kappa2)
    yield epr_protocol.squeezer_maps(kappa2)


def noisy_maps(eta: float, r: float, kappa2: float):
    p = ProtocolParams(kappa2, eta=eta, r=r)
    for stage in ("write-in", "read-out", "transfer"):
        for first_wall in (False, True):
            yield noise_model.noisy_channel(p, stage, first_wall)


def symplectic_error(kappa2_grid=KAPPA2_GRID) -> float:
    return _max(symplectic_defect(m) for k in kappa2_grid for m in lossless_maps(k))


def physicality_violation(kappa2_grid=KAPPA2_GRID, noise_grid=NOISE_GRID) -> float:
    """How far the worst noisy map is from a valid channel (0 when valid)."""
    worst = max(-physicality_margin(m) for k in kappa2_grid for e, r in noise_grid
                for m in noisy_maps(e, r, k))
    for k in kappa2_grid:
        for e, r in noise_grid:
            s = noise_model.squeezer_state(ProtocolParams(k, eta=e, r=r, setup="squeezer"))
            worst = max(worst, -float(np.linalg.eigvalsh(
                s.cov + 0.5j * np.kron(np.eye(2), [[0, 1], [-1, 0]])).min()))
    return max(0.0, worst)


def oracle_deviation(kappa2: float, setup: str, n_segments: int,
                     omega_T: float = DEFAULT_OMEGA_T, stage: str = "write-in") -> np.ndarray:
    """Oracle map in the (atoms, input mode) -> (atoms, output mode) basis minus closed form."""
    p = ProtocolParams(kappa2, omega_T=omega_T, n_segments=n_segments, setup=setup)
    proj = project_run(p, noise_model.mode_envelope(p, "input"),
                       noise_model.mode_envelope(p, "output"))
    if setup == "squeezer":
        ref = epr_protocol.squeezer_maps(kappa2)
    elif stage == "write-in":
        ref = memory_protocol.write_in_map(kappa2)
    else:
        ref = memory_protocol.read_out_map(kappa2)
    return proj.matrix - ref.S


def oracle_noisy_coefficients(params: ProtocolParams) -> dict:
    """Write-in and read-out coefficients measured on the oracle.

    Plus and minus modes of one pulse overlap, so the read-out light is
    resolved on them through their 2x2 Gram system.
    """
    N, w = params.n_segments, params.wT
    modes = {(s, sb): ModeEnvelope(s, w, sb, params.omega_T).functionals(N)
             for s in (1, -1) for sb in ("upper", "lower")}
    led = run(params, probes={"out": modes[-1, "upper"]})
    light = led.layout["light"]
    A, O = led.atoms, led.probes["out"]
    up, um = modes[1, "upper"], modes[-1, "upper"]
    lp, lm = modes[1, "lower"], modes[-1, "lower"]
    ov = up[0] @ um[0]
    G = np.array([[1.0, ov], [ov, 1.0]])
    c24 = np.linalg.solve(G, [(O[:, light] @ up.T)[0, 0], (O[:, light] @ um.T)[0, 0]])
    c35 = np.linalg.solve(G, [(O[:, light] @ lp.T)[0, 1], (O[:, light] @ lm.T)[0, 1]])
    return {
        "atoms": A[0, 0],
        "us_plus": (A[:, light] @ up.T)[0, 0],
        "ls_plus": (A[:, light] @ lp.T)[0, 1],
        "c1": O[0, 0], "c2": c24[0], "c3": c35[0], "c4": c24[1], "c5": c35[1],
    }


def noisy_coefficient_error(params: ProtocolParams) -> float:
    got = oracle_noisy_coefficients(params)
    ref = dict(noise_model.noisy_write_in(params).coefficients)
    ref.update(noise_model.noisy_read_out(params).coefficients)
    return _max(abs(v - ref[k]) for k, v in got.items())


def epr_identity_error(kappa2_grid=KAPPA2_GRID) -> float:
    errs = []
    for k in kappa2_grid:
        z = math.acosh(math.exp(k / 2))
        errs.append(abs(epr_protocol.epr_variance_of(k) - math.exp(-2 * z)))
        errs.append(abs(epr_protocol.spin_squeeze(k).uncertainty_product - 0.25))
        errs.append(abs(epr_protocol.optimal_gain_numeric(k) - epr_protocol.optimal_gain(k)))
    return _max(errs)


def noise_reduction_error(kappa2_grid=KAPPA2_GRID) -> float:
    """Lossless limit of the noisy engine against the ideal results."""
    errs = []
    for k in kappa2_grid:
        p = ProtocolParams(k)
        a, b = memory_protocol.transfer_amplitudes(k)
        c = noise_model.read_out_coefficients(p)
        errs.extend(np.abs(c - np.r_[-b, a, np.zeros(7)]))
        errs.append(abs(noise_model.noisy_write_in(p).coefficients["atoms"] - a))
        for n in PHOTON_NUMBERS:
            errs.append(abs(noise_model.noisy_coherent_fidelity(p, n)
                            - fidelity_metrics.average_coherent(n, k).average))
        dec = noise_model.transfer_decomposition(p)
        errs.append(abs(noise_model.qubit_average_closed(dec)
                        - fidelity_metrics.average_qubit(k).average))
        sq = p.with_(setup="squeezer")
        errs.append(abs(noise_model.noisy_epr_variance(sq) - epr_protocol.epr_variance_of(k)))
    return _max(errs)


def bogoliubov_error(kappa2_grid=KAPPA2_GRID, noise_grid=NOISE_GRID) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", noise_model.PerturbativeWarning)
        return _max(noise_model.transfer_decomposition(ProtocolParams(k, eta=e, r=r)).identity_defect
                    for k in kappa2_grid for e, r in noise_grid)


def checks(level: str = "fast") -> list[tuple[str, float, Callable[[], float]]]:
    """``(name, tolerance, thunk)`` in execution order."""
    cfg = LEVELS[level]
    N, OT, grid = cfg["n_segments"], cfg["omega_T"], cfg["kappa2"]

    def oracle(setup, stage="write-in"):
        return lambda: _max(np.abs(oracle_deviation(k, setup, N, OT, stage)).max() for k in grid)

    def noisy():
        return _max(noisy_coefficient_error(ProtocolParams(k, eta=0.075, r=0.075, n_segments=N))
                    for k in grid)

    return [
        ("closed-form fidelities", 1e-10, closed_form_fidelity_error),
        ("lossless symplecticity", 1e-10, symplectic_error),
        ("noisy-map physicality", 1e-9, physicality_violation),
        ("EPR/squeezing identities", 1e-8, epr_identity_error),
        ("lossless noise reduction", 1e-12, noise_reduction_error),
        ("Bogoliubov identity", 1e-9, bogoliubov_error),
        ("oracle memory write-in", cfg["oracle_tol"], oracle("memory", "write-in")),
        ("oracle memory read-out", cfg["oracle_tol"], oracle("memory", "read-out")),
        ("oracle squeezer", cfg["oracle_tol"], oracle("squeezer")),
        ("oracle noisy coefficients", cfg["noisy_tol"], noisy),
    ]


def run_checks(level: str = "fast", stop_on_failure: bool = False) -> list[Check]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {sorted(LEVELS)}")
    out = []
    for name, tol, thunk in checks(level):
        c = Check(name, thunk(), tol)
        out.append(c)
        if stop_on_failure and not c.passed:
            break
    return out
