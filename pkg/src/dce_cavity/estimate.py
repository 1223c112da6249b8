"""Laboratory-unit estimate of the photon production time."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

C_LIGHT = 2.998e8  # m/s


@dataclass(frozen=True)
class SIEstimate:
    wavelength_cm: float
    cavity_size_cm: float
    photon_frequency_GHz: float
    drive_frequency_GHz: float
    switching_time_ps: float
    k_par_sq_over_omega: float  # 1/s
    squeezing_rate: float  # 1/s
    target_photons: float
    time_to_target: float  # s
    warnings: tuple[str, ...] = field(default=())


def wavelength_for_switching_time(switching_time_s: float) -> float:
    """Photon wavelength in cm whose resonant drive has ``1 / omega = switching_time``."""
    if not switching_time_s > 0:
        raise ValueError(f"switching time must be positive, got {switching_time_s}")
    omega = 1.0 / switching_time_s
    return 2.0 * math.pi * C_LIGHT / (0.5 * omega) * 100.0


def estimate_physical(wavelength_cm: float, chi_over_epsII: float, a_over_L: float,
                      target_photons: float, *, eps_II: float = 1.0,
                      mode: tuple[int, int, int] = (1, 1, 1)) -> SIEstimate:
    """Squeezing rate and time to ``target_photons`` for a cubic cavity.

    The cube side is fixed so that the TM ``mode`` resonates at the given
    free-space wavelength; the drive runs at twice the photon frequency.
    """
    if not wavelength_cm > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength_cm}")
    if not chi_over_epsII > 0:
        raise ValueError(f"chi/eps_II must be positive, got {chi_over_epsII}")
    if a_over_L < 0 or target_photons < 0:
        raise ValueError("a/L and the photon target must be non-negative")
    n_x, n_y, n_z = mode
    if n_y == 0 or n_z == 0:
        raise ValueError(f"TM mode {mode} needs n_y, n_z > 0")
    warnings = []
    if chi_over_epsII > 0.5:
        warnings.append(f"chi/eps_II = {chi_over_epsII:g} exceeds the physical bound 1/2")
    if a_over_L > 0.1:
        warnings.append(f"a/L = {a_over_L:g} is not small; first-order rate unreliable")

    wavelength = wavelength_cm / 100.0
    omega_photon = 2.0 * math.pi * C_LIGHT / wavelength
    n_sq = n_x * n_x + n_y * n_y + n_z * n_z
    side = math.pi * C_LIGHT * math.sqrt(n_sq) / (omega_photon * math.sqrt(eps_II))
    k_par_sq = (n_y * n_y + n_z * n_z) * (math.pi / side) ** 2 * C_LIGHT**2
    omega_drive = 2.0 * omega_photon
    ratio = k_par_sq / omega_drive
    rate = ratio * chi_over_epsII * a_over_L
    t_target = math.asinh(math.sqrt(target_photons)) / rate if rate > 0 else math.inf
    return SIEstimate(
        wavelength_cm=wavelength_cm,
        cavity_size_cm=side * 100.0,
        photon_frequency_GHz=omega_photon / (2.0 * math.pi) / 1e9,
        drive_frequency_GHz=omega_drive / (2.0 * math.pi) / 1e9,
        switching_time_ps=1e12 / omega_drive,
        k_par_sq_over_omega=ratio,
        squeezing_rate=rate,
        target_photons=target_photons,
        time_to_target=t_target,
        warnings=tuple(warnings),
    )
