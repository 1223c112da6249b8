"""Harmonic modulation of the slab permittivity."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvalidDriveError


@dataclass(frozen=True)
class DriveSpec:
    """Drive ``eps_II / eps_I(t) = xi + chi * sin(omega_drive * t)``.

    ``delta`` only records the relative detuning that was used to pick
    ``omega_drive`` (see :func:`resonance_frequency`); it is not applied again.
    """

    xi: float
    chi: float
    omega_drive: float
    eps_II: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if not self.eps_II > 0:
            raise InvalidDriveError(f"eps_II must be positive, got {self.eps_II}")
        if not abs(self.chi) < self.xi:
            raise InvalidDriveError(
                f"|chi| < xi is required for a positive ratio (xi={self.xi}, chi={self.chi})"
            )
        if not self.omega_drive > 0:
            raise InvalidDriveError(f"omega_drive must be positive, got {self.omega_drive}")
        if abs(self.chi) / self.eps_II > 0.5:
            warnings.warn(
                f"chi/eps_II = {abs(self.chi) / self.eps_II:.3g} exceeds the physical bound 1/2",
                stacklevel=2,
            )

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_drive


def drive_ratio(t: float, drive: DriveSpec) -> float:
    ratio = drive.xi + drive.chi * math.sin(drive.omega_drive * t)
    if ratio <= 0:
        raise InvalidDriveError(f"permittivity ratio {ratio} <= 0 at t={t}")
    return ratio


def resonance_frequency(omega0: float, delta: float = 0.0) -> float:
    """Parametric resonance drive frequency ``2 * omega0 * (1 + delta)``."""
    if not omega0 > 0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    return 2.0 * omega0 * (1.0 + delta)
