"""Single-mode parametric evolution and Bogoliubov coefficients.

The resonant mode amplitude obeys ``u'' + Omega^2(t) u = 0`` with the vacuum
initial data ``u(0) = 1/sqrt(2 Omega0)``, ``u'(0) = -i Omega0 u(0)``.  The
equation is linear with a drive-periodic coefficient, so one period of the
fixed-step RK4 map (a real 2x2 matrix) is computed once and applied
repeatedly; this is the same discrete evolution as stepping through every
period, sampled stroboscopically at ``omega t = 0 mod 2 pi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .drive import DriveSpec, drive_ratio, resonance_frequency
from .errors import InvalidModeError, StepRefinementError
from .mode_solver import (
    CavityGeometry,
    ModeIndex,
    PermittivityPair,
    Polarization,
    homogeneous_omega,
    solve_mode,
)
from .perturbation import delta_omega2_tm

METHODS = ("first_order", "exact")
WRONSKIAN_TOL = 1e-9


@dataclass(frozen=True)
class ModeAmplitudeState:
    u: complex
    u_dot: complex
    t: float

    @property
    def wronskian(self) -> float:
        """``2 Im(u conj(u_dot))``; equals 1 for the vacuum normalization."""
        return 2.0 * (self.u * np.conj(self.u_dot)).imag


@dataclass(frozen=True)
class EvolutionResult:
    times: np.ndarray
    alpha_t: np.ndarray
    beta_t: np.ndarray
    n_t: np.ndarray
    wronskian_drift: float
    omega0: float
    rate: float
    drive: DriveSpec
    steps_per_period: int
    method: str

    @property
    def norm_defect(self) -> np.ndarray:
        return np.abs(self.alpha_t) ** 2 - np.abs(self.beta_t) ** 2 - 1.0

    def rwa(self) -> np.ndarray:
        return photon_number_rwa(self.rate, self.times)


def _check_method(method: str):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def _require_tm(mode: ModeIndex):
    if mode.pol is not Polarization.TM:
        raise InvalidModeError(f"{mode.label}: TE modes have no first-order squeezing term")


def base_omega(mode: ModeIndex, geom: CavityGeometry, xi: float, eps_II: float,
               method: str = "exact") -> float:
    """Omega0: the eigenfrequency at the mean ratio ``xi``."""
    _check_method(method)
    if method == "exact":
        return solve_mode(mode, geom, PermittivityPair.from_ratio(xi, eps_II)).omega
    _require_tm(mode)
    return math.sqrt(homogeneous_omega(mode, geom, eps_II) ** 2
                     + delta_omega2_tm(mode, geom, eps_II, xi))


def resonant_drive(mode: ModeIndex, geom: CavityGeometry, xi: float, chi: float,
                   eps_II: float = 1.0, delta: float = 0.0, method: str = "exact") -> DriveSpec:
    omega0 = base_omega(mode, geom, xi, eps_II, method)
    return DriveSpec(xi, chi, resonance_frequency(omega0, delta), eps_II, delta)


def instantaneous_omega_sq(t: float, mode: ModeIndex, geom: CavityGeometry, drive: DriveSpec,
                           method: str = "exact", *, guess: float | None = None) -> float:
    _check_method(method)
    ratio = drive_ratio(t, drive)
    if method == "first_order":
        _require_tm(mode)
        return (homogeneous_omega(mode, geom, drive.eps_II) ** 2
                + delta_omega2_tm(mode, geom, drive.eps_II, ratio))
    eps = PermittivityPair.from_ratio(ratio, drive.eps_II)
    return solve_mode(mode, geom, eps, guess=guess).omega_sq


def modulation_depth(mode: ModeIndex, geom: CavityGeometry, drive: DriveSpec,
                     method: str = "exact") -> float:
    """Relative frequency-modulation amplitude ``max dOmega^2 / (2 Omega0^2)``."""
    _require_tm(mode)
    amp = abs(delta_omega2_tm(mode, geom, drive.eps_II, 1.0 + drive.chi))
    return amp / (2.0 * base_omega(mode, geom, drive.xi, drive.eps_II, method) ** 2)


def squeezing_rate(mode: ModeIndex, geom: CavityGeometry, drive: DriveSpec) -> float:
    """Growth rate r in ``N(t) = sinh^2(r t)``; halved for ``n_x = 0`` modes."""
    _require_tm(mode)
    r = mode.k_par_sq(geom) / drive.omega_drive * abs(drive.chi) / drive.eps_II * geom.a_over_L
    return 0.5 * r if mode.n_x == 0 else r


def photon_number_rwa(rate: float, t):
    return np.sinh(rate * np.asarray(t)) ** 2


def _omega_sq_table(mode, geom, drive, method, steps):
    # Omega^2 at the RK4 nodes j * h/2 of one drive period, j = 0 .. 2*steps
    times = np.arange(2 * steps + 1) * (0.5 * drive.period / steps)
    if method == "first_order":
        return np.array([instantaneous_omega_sq(t, mode, geom, drive, method) for t in times])
    values = np.empty(len(times))
    guess = base_omega(mode, geom, drive.xi, drive.eps_II, "exact") ** 2
    for j, t in enumerate(times):
        guess = values[j] = instantaneous_omega_sq(t, mode, geom, drive, "exact", guess=guess)
    return values


def period_propagator(omega_sq_nodes: np.ndarray, period: float) -> np.ndarray:
    """One-period RK4 transfer matrix for ``(u, u')`` given Omega^2 on the half-step grid."""
    steps = (len(omega_sq_nodes) - 1) // 2
    h = period / steps
    phi = np.eye(2)

    def rhs(w2, m):
        return np.array([m[1], -w2 * m[0]])

    for k in range(steps):
        w_a, w_m, w_b = omega_sq_nodes[2 * k], omega_sq_nodes[2 * k + 1], omega_sq_nodes[2 * k + 2]
        k1 = rhs(w_a, phi)
        k2 = rhs(w_m, phi + 0.5 * h * k1)
        k3 = rhs(w_m, phi + 0.5 * h * k2)
        k4 = rhs(w_b, phi + h * k3)
        phi = phi + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return phi


def bogoliubov(state: ModeAmplitudeState, omega0: float) -> tuple[complex, complex]:
    """Project onto the free solutions of frequency ``omega0``."""
    scale = math.sqrt(0.5 * omega0)
    alpha = scale * (state.u + 1j * state.u_dot / omega0) * np.exp(1j * omega0 * state.t)
    beta = scale * (state.u - 1j * state.u_dot / omega0) * np.exp(-1j * omega0 * state.t)
    return alpha, beta


def evolve_bogoliubov(mode: ModeIndex, geom: CavityGeometry, drive: DriveSpec, duration: float,
                      steps_per_period: int = 1024, method: str = "exact",
                      *, check_wronskian: bool = True) -> EvolutionResult:
    """Integrate the driven mode from the vacuum and sample once per drive period."""
    _check_method(method)
    _require_tm(mode)
    if steps_per_period < 200:
        raise ValueError(f"steps_per_period must be >= 200, got {steps_per_period}")
    periods = int(math.floor(duration / drive.period + 1e-9))
    if periods < 10:
        raise ValueError(f"duration covers {periods} drive periods, need >= 10")

    omega0 = base_omega(mode, geom, drive.xi, drive.eps_II, method)
    prop = period_propagator(_omega_sq_table(mode, geom, drive, method, steps_per_period),
                             drive.period)
    y = np.empty((periods + 1, 2), dtype=complex)
    u0 = 1.0 / math.sqrt(2.0 * omega0)
    y[0] = (u0, -1j * omega0 * u0)
    for k in range(periods):
        y[k + 1] = prop @ y[k]

    times = np.arange(periods + 1) * drive.period
    scale = math.sqrt(0.5 * omega0)
    alpha = scale * (y[:, 0] + 1j * y[:, 1] / omega0) * np.exp(1j * omega0 * times)
    beta = scale * (y[:, 0] - 1j * y[:, 1] / omega0) * np.exp(-1j * omega0 * times)
    n_t = np.abs(beta) ** 2
    drift = float(np.max(np.abs(np.abs(alpha) ** 2 - n_t - 1.0)))
    if check_wronskian and drift > WRONSKIAN_TOL:
        raise StepRefinementError(f"Wronskian drift {drift:.3g} > {WRONSKIAN_TOL:g} at "
                                  f"{steps_per_period} steps/period; double the resolution")
    return EvolutionResult(times, alpha, beta, n_t, drift, omega0,
                           squeezing_rate(mode, geom, drive), drive, steps_per_period, method)


def fitted_growth_rate(result: EvolutionResult, n_min: float, n_max: float) -> float:
    """Half the slope of log N(t) over samples with ``n_min <= N <= n_max``."""
    sel = (result.n_t >= n_min) & (result.n_t <= n_max)
    if sel.sum() < 3:
        raise ValueError(f"fewer than 3 samples with N in [{n_min}, {n_max}]")
    slope, _ = np.polyfit(result.times[sel], np.log(result.n_t[sel]), 1)
    return 0.5 * float(slope)


@dataclass(frozen=True)
class DetuningPoint:
    delta: float
    delta_over_depth: float
    max_n: float
    final_n: float


def detuning_sweep(mode: ModeIndex, geom: CavityGeometry, xi: float, chi: float, eps_II: float,
                   delta_over_depth, periods: int = 200, steps_per_period: int = 1024,
                   method: str = "first_order") -> list[DetuningPoint]:
    """Photon production against detuning, in units of the modulation depth."""
    probe = resonant_drive(mode, geom, xi, chi, eps_II, 0.0, method)
    depth = modulation_depth(mode, geom, probe, method)
    out = []
    for x in delta_over_depth:
        drive = resonant_drive(mode, geom, xi, chi, eps_II, x * depth, method)
        res = evolve_bogoliubov(mode, geom, drive, (periods + 0.5) * drive.period,
                                steps_per_period, method)
        out.append(DetuningPoint(x * depth, float(x), float(res.n_t.max()), float(res.n_t[-1])))
    return out
