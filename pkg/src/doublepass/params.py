"""Physical knobs shared by the oracle, the closed-form maps and the noise model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

DEFAULT_OMEGA_T = 2 * math.pi * 50
DEFAULT_SEGMENTS = 4000

SETUPS = ("memory", "squeezer")


class ApproximationWarning(UserWarning):
    """Larmor rotation is not fast compared to the damping/gain rate."""


@dataclass(frozen=True)
class ProtocolParams:
    """Dimensionless parameters of one double-pass run.

    Times are measured in units of the pulse duration T, so ``omega_T`` is
    the Larmor phase accumulated over the pulse and ``eta`` the integrated
    transverse decay. ``r`` is the reflection loss per cell-wall crossing.
    """

    kappa2: float
    omega_T: float = DEFAULT_OMEGA_T
    n_segments: int = DEFAULT_SEGMENTS
    loop_delay_segments: int = 0
    simultaneous_passes: bool = False
    eta: float = 0.0
    r: float = 0.0
    setup: str = "memory"
    first_wall: bool = False

    def __post_init__(self):
        if self.kappa2 < 0:
            raise ValueError("kappa2 must be >= 0")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if not 0 <= self.r < 0.5:
            raise ValueError("r must lie in [0, 1/2)")
        if self.n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        if self.loop_delay_segments < 0:
            raise ValueError("loop_delay_segments must be >= 0")
        if self.setup not in SETUPS:
            raise ValueError(f"setup must be one of {SETUPS}")
        if self.omega_T < 20 * (self.eta + self.kappa2 * (1 - 2 * self.r)):
            warnings.warn(
                f"omega_T={self.omega_T:.3g} is not large compared to the "
                f"rate {self.eta + self.kappa2 * (1 - 2 * self.r):.3g}; "
                "sideband modes will not decouple cleanly",
                ApproximationWarning,
                stacklevel=3,
            )

    @property
    def sign(self) -> int:
        """+1 for the passive (memory) geometry, -1 for the active one."""
        return 1 if self.setup == "memory" else -1

    @property
    def kappa(self) -> float:
        return math.sqrt(self.kappa2)

    @property
    def kappa_tilde(self) -> float:
        """Second-pass coupling after two wall crossings."""
        return math.sqrt(1 - 2 * self.r) * self.kappa

    @property
    def wT(self) -> float:
        """Generalized exponent; negative values mean net gain (squeezer)."""
        return self.eta + self.sign * self.kappa2 * (1 - 2 * self.r)

    @property
    def larmor_periods(self) -> float:
        return self.omega_T / (2 * math.pi)

    @property
    def is_commensurate(self) -> bool:
        n = self.larmor_periods
        return n >= 1 and abs(n - round(n)) < 1e-9

    @property
    def is_lossless(self) -> bool:
        return self.eta == 0 and self.r == 0

    def with_(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)
