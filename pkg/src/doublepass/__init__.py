"""Double-pass light-atom protocols: exponential memory and EPR source.

Closed-form input-output maps, a discretized pulse oracle, a Langevin noise
model and the fidelity/entanglement figures of merit built on them.
"""

from .gaussian_core import (
    GaussianState,
    LinearIOMap,
    apply_map,
    check_symplectic,
    epr_variance,
    make_vacuum,
)
from .params import ApproximationWarning, ProtocolParams

__version__ = "0.1.0"

__all__ = [
    "ApproximationWarning",
    "GaussianState",
    "LinearIOMap",
    "ProtocolParams",
    "apply_map",
    "check_symplectic",
    "epr_variance",
    "make_vacuum",
]
