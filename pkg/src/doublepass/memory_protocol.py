"""Closed-form maps of the passive (memory) geometry.

Write-in: a pulse in the upper-sideband plus mode ``L+`` is mapped onto the
atoms, and the light leaves in the minus mode ``L-`` of the same pulse.
Read-out: a fresh pulse enters in its plus mode, the atoms are mapped onto its
minus mode. Both are beam splitters with amplitude transmission
``a = exp(-kappa2/2)`` and reflection ``b = sqrt(1 - exp(-kappa2))``:

    atoms_out = a atoms_in + b light_in
    light_out = -b atoms_in + a light_in

applied identically to the x and p quadratures.
"""

from __future__ import annotations

import math

import numpy as np

from .envelopes import ModeEnvelope, minus_mode, plus_mode
from .gaussian_core import LinearIOMap
from .params import DEFAULT_OMEGA_T

__all__ = [
    "ModeEnvelope",
    "transfer_amplitudes",
    "write_in_map",
    "read_out_map",
    "complete_transfer_map",
    "sideband_mode",
    "plus_mode",
    "minus_mode",
]


def transfer_amplitudes(kappa2: float) -> tuple[float, float]:
    """``(exp(-kappa2/2), sqrt(1 - exp(-kappa2)))``; the squares sum to 1."""
    if kappa2 < 0:
        raise ValueError("kappa2 must be >= 0")
    return math.exp(-0.5 * kappa2), math.sqrt(-math.expm1(-kappa2))


def _exchange(kappa2: float, atoms: str, light_in: str, light_out: str,
              name: str) -> LinearIOMap:
    a, b = transfer_amplitudes(kappa2)
    S = np.kron(np.array([[a, b], [-b, a]]), np.eye(2))
    return LinearIOMap(S, (atoms, light_in), (atoms, light_out),
                       meta={"kappa2": kappa2, "stage": name})


def write_in_map(kappa2: float, light_in: str = "L+", light_out: str = "L-") -> LinearIOMap:
    """Storage of the plus-mode input; the atoms row is the physical result."""
    return _exchange(kappa2, "atoms", light_in, light_out, "write-in")


def read_out_map(kappa2: float, light_in: str = "readout+",
                 light_out: str = "readout-") -> LinearIOMap:
    """Retrieval into the minus mode of an independent read-out pulse."""
    return _exchange(kappa2, "atoms", light_in, light_out, "read-out")


def complete_transfer_map(kappa2: float, kappa2_read: float | None = None) -> LinearIOMap:
    """Write-in followed by read-out.

    Inputs ``(signal+, atoms, readout+)``, outputs ``(signal-, atoms,
    readout-)``. The retrieved signal is
    ``readout- = -b^2 signal+ - a b atoms + a readout+``.
    """
    k_read = kappa2 if kappa2_read is None else kappa2_read
    write = write_in_map(kappa2, "signal+", "signal-").embed(("signal+", "atoms", "readout+"))
    read = read_out_map(k_read).embed(write.out_modes)
    out = write.then(read)
    return LinearIOMap(out.S, out.in_modes, out.out_modes,
                       meta={"kappa2": kappa2, "kappa2_read": k_read})


def sideband_mode(which: str = "upper", omega_T: float = DEFAULT_OMEGA_T) -> ModeEnvelope:
    """Flat-envelope sideband mode, the ``rate -> 0`` limit of the plus mode."""
    return ModeEnvelope(1, 0.0, which, omega_T)
