"""First-order thin-slab formulas and their error-order validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModeError, ResidualUnderflowError
from .mode_solver import (
    CavityGeometry,
    ModeIndex,
    PermittivityPair,
    Polarization,
    solve_mode,
)

# residuals below this (relative to k_perp) are treated as solver noise
UNDERFLOW_FLOOR = 1e-13


@dataclass(frozen=True)
class PerturbativeShift:
    kx_II_first_order: float
    delta_omega_sq: float
    L_eff: float
    claimed_error_order: int


def _require(mode: ModeIndex, pol: Polarization, need_nx: bool = True):
    if mode.pol is not pol:
        raise InvalidModeError(f"{mode.label}: formula is for {pol.value} modes")
    if need_nx and mode.n_x < 1:
        raise InvalidModeError(f"{mode.label}: formula needs n_x >= 1")


def kx_te_first_order(mode: ModeIndex, geom: CavityGeometry) -> float:
    """TE axial wavenumber in the bulk; the slab enters only at third order."""
    _require(mode, Polarization.TE)
    return mode.n_x * math.pi / geom.L


def kx_tm_first_order(mode: ModeIndex, geom: CavityGeometry, eps: PermittivityPair) -> float:
    _require(mode, Polarization.TM)
    _, _, k_perp = mode.wavenumbers(geom)
    return k_perp * (1.0 + geom.a_over_L * (eps.ratio - 1.0) * mode.k_par_sq(geom) / k_perp**2)


def delta_omega2_tm(mode: ModeIndex, geom: CavityGeometry, eps_II: float, ratio: float) -> float:
    """First-order shift of Omega^2 for a TM mode at ``ratio = eps_II / eps_I``.

    Modes with ``n_x = 0`` get half the generic value.
    """
    _require(mode, Polarization.TM, need_nx=False)
    if not ratio > 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    shift = 2.0 / eps_II * mode.k_par_sq(geom) * geom.a_over_L * (ratio - 1.0)
    return 0.5 * shift if mode.n_x == 0 else shift


def effective_length(mode: ModeIndex, geom: CavityGeometry, ratio: float) -> float:
    """Length of the empty cavity whose TM spectrum mimics the slab to first order."""
    _require(mode, Polarization.TM)
    _, _, k_perp = mode.wavenumbers(geom)
    return geom.L * (1.0 - geom.a_over_L * (ratio - 1.0) * mode.k_par_sq(geom) / k_perp**2)


def perturbative_shift(mode: ModeIndex, geom: CavityGeometry, eps: PermittivityPair) -> PerturbativeShift:
    if mode.pol is Polarization.TE:
        return PerturbativeShift(kx_te_first_order(mode, geom), 0.0, geom.L, 3)
    return PerturbativeShift(
        kx_tm_first_order(mode, geom, eps),
        delta_omega2_tm(mode, geom, eps.eps_II, eps.ratio),
        effective_length(mode, geom, eps.ratio),
        2,
    )


def kx_first_order(mode: ModeIndex, geom: CavityGeometry, eps: PermittivityPair) -> float:
    if mode.pol is Polarization.TE:
        return kx_te_first_order(mode, geom)
    return kx_tm_first_order(mode, geom, eps)


def order_residuals(mode: ModeIndex, base: CavityGeometry, a_over_L, eps: PermittivityPair) -> np.ndarray:
    """``|k_x^II(exact) - k_x^II(first order)|`` for each slab fraction."""
    out = []
    for ratio in a_over_L:
        geom = base.with_a_over_L(ratio)
        exact = solve_mode(mode, geom, eps).kx_II
        out.append(abs(exact - kx_first_order(mode, geom, eps)))
    return np.array(out)


def error_order_fit(mode: ModeIndex, base: CavityGeometry, a_over_L, eps: PermittivityPair) -> float:
    """Least-squares slope of log residual against log(a/L).

    Raises :class:`ResidualUnderflowError` when residuals hit solver precision
    or fail to decrease with the slab thickness.
    """
    a_over_L = np.asarray(sorted(a_over_L), dtype=float)
    if len(a_over_L) < 4 or math.log10(a_over_L[-1] / a_over_L[0]) < 1.5:
        raise ValueError("need >= 4 slab fractions spanning >= 1.5 decades")
    res = order_residuals(mode, base, a_over_L, eps)
    floor = UNDERFLOW_FLOOR * mode.n_x * math.pi / base.L
    if np.any(res <= floor) or np.any(np.diff(res) <= 0):
        raise ResidualUnderflowError(f"{mode.label}: residuals {res} are at solver precision "
                                     "or non-monotone; increase the permittivity contrast")
    slope, _ = np.polyfit(np.log(a_over_L), np.log(res), 1)
    return float(slope)
