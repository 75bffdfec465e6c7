"""Data behind each figure and behind parameter sweeps.

A :class:`Table` is a list of rows with named columns plus ``meta``, the
parameters and conventions needed to regenerate it.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from . import epr_protocol, fidelity_metrics, memory_protocol, noise_model
from .params import DEFAULT_OMEGA_T, ProtocolParams

KAPPA2_RANGE = (0.0, 5.0)
R_RANGE = (0.0, 0.2)
KAPPA2_WINDOW = (0.01, 8.0)
PHOTON_NUMBERS = (4, 8, 20)
ETA_FAMILY = (0.05, 0.10, 0.25)
LOSS_FIDELITY = 0.075
LOSS_SQUEEZER = 0.10
DEFAULT_POINTS = 51

CONVENTIONS = {
    "vacuum_variance": "0.5",
    "quadrature_order": "interleaved (x, p) per mode",
    "epr_normalization": "two-mode vacuum = 1",
    "squeezing_reference": "vacuum variance (0 dB)",
    "coherent_ensemble": "Gaussian amplitude distribution, mean photon number n",
    "qubit_fidelity": "overlap with environment in vacuum, Bloch average",
}

QUANTITIES = ("coherent", "qubit", "epr", "squeezing")
SWEEP_AXES = ("kappa2", "r", "eta", "n")


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple[float, ...]]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([row[i] for row in self.rows])


# ---------------------------------------------------------------------------
# point evaluators


def _quiet(f: Callable, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", noise_model.PerturbativeWarning)
        return f(*args, **kw)


def coherent(kappa2: float, eta: float, r: float, n: float,
             omega_T: float = DEFAULT_OMEGA_T, first_wall: bool = False) -> float:
    p = ProtocolParams(kappa2, omega_T=omega_T, eta=eta, r=r)
    return noise_model.noisy_coherent_fidelity(p, n, first_wall)


def qubit(kappa2: float, eta: float, r: float, omega_T: float = DEFAULT_OMEGA_T,
          first_wall: bool = True) -> float:
    p = ProtocolParams(kappa2, omega_T=omega_T, eta=eta, r=r)
    dec = _quiet(noise_model.transfer_decomposition, p, first_wall)
    return noise_model.qubit_average_closed(dec)


def epr(kappa2: float, eta: float, r: float, omega_T: float = DEFAULT_OMEGA_T) -> float:
    p = ProtocolParams(kappa2, omega_T=omega_T, eta=eta, r=r, setup="squeezer")
    return noise_model.noisy_epr_variance(p)


def squeezing(kappa2: float, eta: float, r: float,
              omega_T: float = DEFAULT_OMEGA_T) -> epr_protocol.FeedbackResult:
    p = ProtocolParams(kappa2, omega_T=omega_T, eta=eta, r=r, setup="squeezer")
    return noise_model.noisy_epr_and_squeezing(p)[1]


def _optimal(objective: Callable[[float], float], maximize: bool,
             window=KAPPA2_WINDOW) -> noise_model.Optimum:
    return noise_model.optimize_kappa2(objective, window[0], window[1], maximize=maximize)


# ---------------------------------------------------------------------------
# figures


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    return np.linspace(lo, hi, points)


def _fig4a(points):
    rows = []
    for k in _grid(*KAPPA2_RANGE, points):
        m = memory_protocol.complete_transfer_map(k)
        f = [fidelity_metrics.map_coherent_fidelity(m, n) for n in PHOTON_NUMBERS]
        rows.append((k, *f, *map(fidelity_metrics.coherent_classical_limit, PHOTON_NUMBERS)))
    cols = ("kappa2", *(f"F_coh_n{n}" for n in PHOTON_NUMBERS),
            *(f"classical_n{n}" for n in PHOTON_NUMBERS))
    return cols, rows, {"eta": 0, "r": 0, "n": ",".join(map(str, PHOTON_NUMBERS))}


def _fig4b(points):
    rows = [(k, fidelity_metrics.map_qubit_average(memory_protocol.complete_transfer_map(k)),
             fidelity_metrics.QUBIT_CLASSICAL_LIMIT) for k in _grid(*KAPPA2_RANGE, points)]
    return ("kappa2", "F_qubit", "classical"), rows, {"eta": 0, "r": 0}


def _fig5(points):
    rows = [(k, epr_protocol.epr_variance_of(k)) for k in _grid(*KAPPA2_RANGE, points)]
    return ("kappa2", "delta_epr"), rows, {"eta": 0, "r": 0}


def _fig6(points):
    rows = []
    for k in _grid(*KAPPA2_RANGE, points):
        res = epr_protocol.spin_squeeze(k)
        rows.append((k, res.squeezing_db, res.var_p_fb, res.g))
    return ("kappa2", "squeezing_db", "var_p", "g_opt"), rows, {"eta": 0, "r": 0}


def _fig7a(points):
    e = LOSS_FIDELITY
    rows = []
    for k in _grid(*KAPPA2_RANGE, points):
        f = [coherent(k, e, e, n) for n in PHOTON_NUMBERS]
        rows.append((k, *f, *map(fidelity_metrics.coherent_classical_limit, PHOTON_NUMBERS)))
    cols = ("kappa2", *(f"F_coh_n{n}" for n in PHOTON_NUMBERS),
            *(f"classical_n{n}" for n in PHOTON_NUMBERS))
    return cols, rows, {"eta": e, "r": e, "n": ",".join(map(str, PHOTON_NUMBERS)),
                        "first_wall": "off"}


def _fig7b(points):
    e = LOSS_FIDELITY
    rows = [(k, qubit(k, e, e), fidelity_metrics.QUBIT_CLASSICAL_LIMIT)
            for k in _grid(*KAPPA2_RANGE, points)]
    return ("kappa2", "F_qubit", "classical"), rows, {"eta": e, "r": e, "first_wall": "on"}


def _eta_tag(eta: float) -> str:
    return f"eta{eta:g}"


def _vs_r(points, value, maximize, extra=()):
    rows = []
    for r in _grid(*R_RANGE, points):
        vals, opts = [], []
        for eta in ETA_FAMILY:
            best = _optimal(lambda k: value(k, eta, r), maximize)
            vals.append(best.value)
            opts.append(best.kappa2)
        rows.append((r, *vals, *opts, *extra))
    return rows


def _fig8a(points):
    n = 8
    rows = _vs_r(points, lambda k, e, r: coherent(k, e, r, n), True,
                 (fidelity_metrics.coherent_classical_limit(n),))
    cols = ("r", *(f"F_coh_max_{_eta_tag(e)}" for e in ETA_FAMILY),
            *(f"kappa2_opt_{_eta_tag(e)}" for e in ETA_FAMILY), "classical")
    return cols, rows, {"n": n, "eta": ",".join(map(str, ETA_FAMILY)), "first_wall": "off"}


def _fig8b(points):
    rows = _vs_r(points, qubit, True, (fidelity_metrics.QUBIT_CLASSICAL_LIMIT,))
    cols = ("r", *(f"F_qubit_max_{_eta_tag(e)}" for e in ETA_FAMILY),
            *(f"kappa2_opt_{_eta_tag(e)}" for e in ETA_FAMILY), "classical")
    return cols, rows, {"eta": ",".join(map(str, ETA_FAMILY)), "first_wall": "on"}


def _fig9a(points):
    e = LOSS_SQUEEZER
    rows = [(k, epr(k, e, e), epr_protocol.epr_variance_of(k))
            for k in _grid(*KAPPA2_RANGE, points)]
    return ("kappa2", "delta_epr", "delta_epr_lossless"), rows, {"eta": e, "r": e}


def _fig9b(points):
    rows = _vs_r(points, epr, False)
    cols = ("r", *(f"delta_epr_min_{_eta_tag(e)}" for e in ETA_FAMILY),
            *(f"kappa2_opt_{_eta_tag(e)}" for e in ETA_FAMILY))
    return cols, rows, {"eta": ",".join(map(str, ETA_FAMILY))}


def _fig10a(points):
    e = LOSS_SQUEEZER
    rows = []
    for k in _grid(*KAPPA2_RANGE, points):
        res = squeezing(k, e, e)
        rows.append((k, res.squeezing_db, res.var_p_fb, res.g))
    return ("kappa2", "squeezing_db", "var_p", "g_opt"), rows, {"eta": e, "r": e}


def _fig10b(points):
    rows = _vs_r(points, lambda k, e, r: squeezing(k, e, r).squeezing_db, False)
    cols = ("r", *(f"squeezing_db_max_{_eta_tag(e)}" for e in ETA_FAMILY),
            *(f"kappa2_opt_{_eta_tag(e)}" for e in ETA_FAMILY))
    return cols, rows, {"eta": ",".join(map(str, ETA_FAMILY))}


FIGURES: dict[str, tuple[str, Callable]] = {
    "4a": ("ideal memory, coherent-state average fidelity vs kappa2", _fig4a),
    "4b": ("ideal memory, qubit average fidelity vs kappa2", _fig4b),
    "5": ("ideal EPR source, EPR variance vs kappa2", _fig5),
    "6": ("ideal spin squeezing (dB) and optimal gain vs kappa2", _fig6),
    "7a": ("noisy memory (r=eta=7.5%), coherent fidelity vs kappa2", _fig7a),
    "7b": ("noisy memory (r=eta=7.5%), qubit fidelity vs kappa2", _fig7b),
    "8a": ("max coherent fidelity (n=8) vs r, eta in {5,10,25}%", _fig8a),
    "8b": ("max qubit fidelity vs r, eta in {5,10,25}%", _fig8b),
    "9a": ("noisy EPR variance (r=eta=10%) vs kappa2", _fig9a),
    "9b": ("kappa-optimized EPR variance vs r, eta in {5,10,25}%", _fig9b),
    "10a": ("noisy squeezing (r=eta=10%) and g_opt vs kappa2", _fig10a),
    "10b": ("max squeezing vs r, eta in {5,10,25}%", _fig10b),
}


def figure_table(fig_id: str, points: int = DEFAULT_POINTS) -> Table:
    if fig_id not in FIGURES:
        raise KeyError(f"unknown figure id {fig_id!r}")
    if points < 2:
        raise ValueError("points must be >= 2")
    title, build = FIGURES[fig_id]
    cols, rows, params = build(points)
    meta = {"figure": fig_id, "title": title, "points": points}
    if cols[0] == "kappa2":
        meta["kappa2_range"] = f"{KAPPA2_RANGE[0]:g},{KAPPA2_RANGE[1]:g}"
    else:
        meta["r_range"] = f"{R_RANGE[0]:g},{R_RANGE[1]:g}"
        meta["kappa2_window"] = f"{KAPPA2_WINDOW[0]:g},{KAPPA2_WINDOW[1]:g}"
    meta.update({k: str(v) for k, v in params.items()})
    meta["omega_T"] = repr(DEFAULT_OMEGA_T)
    meta.update(CONVENTIONS)
    return Table(tuple(cols), [tuple(float(v) for v in row) for row in rows], meta)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRange:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("sweep steps must be >= 2")
        if self.start == self.stop:
            raise ValueError("empty sweep range (start == stop)")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


def _objective(quantity: str, e: float, r: float, n: float, omega_T: float):
    """Scalar objective in kappa2 and whether larger is better."""
    if quantity == "coherent":
        return (lambda k: coherent(k, e, r, n, omega_T)), True
    if quantity == "qubit":
        return (lambda k: qubit(k, e, r, omega_T)), True
    if quantity == "epr":
        return (lambda k: epr(k, e, r, omega_T)), False
    return (lambda k: squeezing(k, e, r, omega_T).var_p_fb), False


def _sweep_point(point: dict, quantity: str, optimize: bool, window, omega_T: float) -> tuple:
    k, e, r, n = point["kappa2"], point["eta"], point["r"], point["n"]
    value, maximize = _objective(quantity, e, r, n, omega_T)
    if optimize:
        k = _optimal(value, maximize, window).kappa2
    if quantity == "squeezing":
        res = squeezing(k, e, r, omega_T)
        out = (res.squeezing_db, res.var_p_fb, res.g)
    else:
        out = (value(k),)
    if quantity == "coherent":
        out += (fidelity_metrics.coherent_classical_limit(n),)
    elif quantity == "qubit":
        out += (fidelity_metrics.QUBIT_CLASSICAL_LIMIT,)
    return out + ((k,) if optimize else ())


def sweep_table(quantity: str, fixed: dict, ranges: dict[str, SweepRange],
                optimize: bool = False, window=KAPPA2_WINDOW,
                omega_T: float = DEFAULT_OMEGA_T, jobs: int = 1) -> Table:
    """Grid evaluation over ``ranges`` (Cartesian product, fixed axis order).

    ``fixed`` supplies every axis not swept. With ``optimize`` each point is
    maximized (fidelities) or minimized (EPR variance, squeezed variance)
    over kappa2 in ``window``.
    """
    if quantity not in QUANTITIES:
        raise ValueError(f"quantity must be one of {QUANTITIES}")
    if not ranges:
        raise ValueError("nothing to sweep: give at least one range")
    if optimize and "kappa2" in ranges:
        raise ValueError("cannot sweep kappa2 and optimize it at the same time")
    axes = [a for a in SWEEP_AXES if a in ranges]
    grids = np.meshgrid(*(ranges[a].values() for a in axes), indexing="ij")
    points = []
    for idx in np.ndindex(grids[0].shape):
        pt = dict(fixed)
        pt.update({a: float(g[idx]) for a, g in zip(axes, grids)})
        points.append(pt)
    work = partial(_sweep_point, quantity=quantity, optimize=optimize, window=window,
                   omega_T=omega_T)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            values = list(pool.map(work, points))
    else:
        values = [work(p) for p in points]

    cols = {"coherent": ("F_coh", "classical"), "qubit": ("F_qubit", "classical"),
            "epr": ("delta_epr",), "squeezing": ("squeezing_db", "var_p", "g_opt")}[quantity]
    cols = (*axes, *cols) + (("kappa2_opt",) if optimize else ())
    rows = [tuple(float(pt[a]) for a in axes) + tuple(map(float, v))
            for pt, v in zip(points, values)]
    meta = {"quantity": quantity, "optimize": "kappa2" if optimize else "none"}
    for a in SWEEP_AXES:
        if a in ranges:
            rg = ranges[a]
            meta[a] = f"{rg.start!r}:{rg.stop!r}:{rg.steps}"
        elif not (optimize and a == "kappa2"):
            meta[a] = repr(float(fixed[a]))
    if optimize:
        meta["kappa2_window"] = f"{window[0]!r},{window[1]!r}"
    meta["omega_T"] = repr(omega_T)
    meta["first_wall"] = "on" if quantity == "qubit" else "off"
    if quantity == "squeezing":
        meta["g"] = "optimized per point"
    meta.update(CONVENTIONS)
    return Table(cols, rows, meta)


def interior_extremum(x, y, maximize: bool = True) -> bool:
    """True if the extreme of sampled ``y`` lies strictly inside the grid."""
    y = np.asarray(y)
    i = int(np.argmax(y) if maximize else np.argmin(y))
    return 0 < i < len(y) - 1 and math.isfinite(float(np.asarray(x)[i]))
