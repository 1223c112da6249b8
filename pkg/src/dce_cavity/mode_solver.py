"""Exact eigenmodes of a rectangular cavity with a dielectric slab at x = 0.

Region I (the slab) is ``0 <= x <= a`` with permittivity ``eps_I``; region II
is ``a <= x <= L`` with ``eps_II``.  The dual potential of a mode is separable,

    f_x = A_x S(x) cos(k_y y) cos(k_z z)
    f_y = A_y C(x) sin(k_y y) cos(k_z z)
    f_z = A_z C(x) cos(k_y y) sin(k_z z)

with ``C(u) = cos(k u)`` and ``S(u) = sin(k u) / k`` for ``k**2 = s``.  In
region II the axial coordinate is ``u = x - L``.  Both functions are entire
in ``s`` so evanescent fields (``s < 0``: cosh / sinh) need no complex
arithmetic, and ``C' = -s S``, ``S' = C`` hold on every branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .drive import DriveSpec, drive_ratio
from .errors import (
    ContinuationError,
    InvalidModeError,
    PoleProximityError,
    RootNotBracketedError,
    StepRefinementError,
)

POLE_TOL = 1e-12
SCAN_STEP = 1e-3  # in units of (pi / L)**2
_SCAN_CHUNK = 4096
# finite-difference noise level of coupling elements at the default step
M_NOISE_FLOOR = 1e-7


# --------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class CavityGeometry:
    L: float
    L_y: float
    L_z: float
    a: float

    def __post_init__(self):
        if not (self.L_y > 0 and self.L_z > 0):
            raise ValueError(f"L_y, L_z must be positive, got {self.L_y}, {self.L_z}")
        if not 0 < self.a < self.L:
            raise ValueError(f"0 < a < L is required, got a={self.a}, L={self.L}")

    @property
    def a_over_L(self) -> float:
        return self.a / self.L

    def with_a_over_L(self, a_over_L: float) -> CavityGeometry:
        return CavityGeometry(self.L, self.L_y, self.L_z, a_over_L * self.L)


@dataclass(frozen=True)
class PermittivityPair:
    eps_I: float
    eps_II: float

    def __post_init__(self):
        if not (self.eps_I > 0 and self.eps_II > 0):
            raise ValueError(f"permittivities must be positive, got {self.eps_I}, {self.eps_II}")

    @property
    def ratio(self) -> float:
        """eps_II / eps_I, the quantity the drive modulates."""
        return self.eps_II / self.eps_I

    @classmethod
    def from_ratio(cls, ratio: float, eps_II: float = 1.0) -> PermittivityPair:
        return cls(eps_II / ratio, eps_II)


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class ModeIndex:
    n_x: int
    n_y: int
    n_z: int
    pol: Polarization

    def __post_init__(self):
        object.__setattr__(self, "pol", Polarization(self.pol))
        for name in ("n_x", "n_y", "n_z"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise InvalidModeError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))
        if self.n_y == 0 and self.n_z == 0:
            raise InvalidModeError("n_y = n_z = 0 leaves the TE/TM split undefined")
        if sum(n > 0 for n in (self.n_x, self.n_y, self.n_z)) < 2:
            raise InvalidModeError(f"mode {self.label} vanishes identically")
        if self.pol is Polarization.TE and self.n_x == 0:
            raise InvalidModeError("TE modes start at n_x = 1")

    @property
    def label(self) -> str:
        return f"{self.pol.value}({self.n_x},{self.n_y},{self.n_z})"

    @property
    def branch(self) -> int:
        """Zero-based position of this root among the roots of its dispersion relation."""
        return self.n_x - 1 if self.pol is Polarization.TE else self.n_x

    @property
    def has_field(self) -> bool:
        # B_x = 0 together with div = 0 forces the field to zero unless both
        # perpendicular indices are non-zero.
        return self.pol is Polarization.TE or (self.n_y > 0 and self.n_z > 0)

    def wavenumbers(self, geom: CavityGeometry) -> tuple[float, float, float]:
        """(k_y, k_z, k_perp) with k_perp = n_x pi / L."""
        return (
            self.n_y * math.pi / geom.L_y,
            self.n_z * math.pi / geom.L_z,
            self.n_x * math.pi / geom.L,
        )

    def k_par_sq(self, geom: CavityGeometry) -> float:
        k_y, k_z, _ = self.wavenumbers(geom)
        return k_y * k_y + k_z * k_z


@dataclass(frozen=True)
class ModeSolution:
    s_I: float
    s_II: float
    omega: float
    k_par_sq: float
    k_perp: float

    @property
    def omega_sq(self) -> float:
        return self.omega * self.omega

    @property
    def kx_II(self) -> float:
        """Axial wavenumber in region II (negative ``s_II`` returns -kappa)."""
        return math.copysign(math.sqrt(abs(self.s_II)), self.s_II)


# --------------------------------------------------------------------------
# Axial functions


def _axial_scalar(s: float, u: float) -> tuple[float, float]:
    if s > 0:
        k = math.sqrt(s)
        z = k * u
        c = math.cos(z)
        sn = math.sin(z) / k if abs(z) > 1e-4 else u * (1.0 - z * z / 6.0 + z**4 / 120.0)
    elif s < 0:
        k = math.sqrt(-s)
        z = k * u
        c = math.cosh(z)
        sn = math.sinh(z) / k if abs(z) > 1e-4 else u * (1.0 + z * z / 6.0 + z**4 / 120.0)
    else:
        c, sn = 1.0, u
    return sn, c


def axial_functions(s, u):
    """Return ``(S, C)``: ``sin(k u)/k`` and ``cos(k u)`` continued to ``s <= 0``."""
    s, u = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(u, dtype=float))
    k = np.sqrt(np.abs(s))
    z = k * u
    pos = s > 0
    c = np.where(pos, np.cos(z), np.cosh(z))
    small = np.abs(z) <= 1e-4
    w = -s * u * u
    series = 1.0 + w / 6.0 + w * w / 120.0
    zsafe = np.where(small, 1.0, z)
    ratio = np.where(pos, np.sin(zsafe), np.sinh(zsafe)) / zsafe
    sn = u * np.where(small, series, ratio)
    return sn, c


def axial_kernel(s: float, d: float) -> float:
    """``tan(sqrt(s) d) / sqrt(s)`` continued through ``s = 0`` to ``tanh``."""
    sn, c = _axial_scalar(s, d)
    if abs(c) < POLE_TOL:
        raise PoleProximityError(f"tan pole at s={s}, d={d}")
    return sn / c


# --------------------------------------------------------------------------
# Dispersion relation


def _split(omega_sq, k_par_sq, eps: PermittivityPair):
    return eps.eps_I * omega_sq - k_par_sq, eps.eps_II * omega_sq - k_par_sq


def dispersion_residual(omega_sq: float, mode: ModeIndex, geom: CavityGeometry,
                        eps: PermittivityPair) -> float:
    """Matching-condition residual; zero exactly at the eigenfrequencies.

    TE: ``K(s_I, a) - K(s_II, a - L)``; TM: the same kernels weighted by
    ``s / eps``.  Raises :class:`PoleProximityError` next to a tan pole.
    """
    if not omega_sq > 0:
        raise ValueError(f"omega_sq must be positive, got {omega_sq}")
    s1, s2 = _split(omega_sq, mode.k_par_sq(geom), eps)
    k1 = axial_kernel(s1, geom.a)
    k2 = axial_kernel(s2, geom.a - geom.L)
    if mode.pol is Polarization.TE:
        return k1 - k2
    return s1 * k1 / eps.eps_I - s2 * k2 / eps.eps_II


def _cleared_residual(omega_sq, k_par_sq, pol, geom, eps) -> float:
    # residual * C_I * C_II: same roots, no poles
    s1, s2 = _split(omega_sq, k_par_sq, eps)
    S1, C1 = _axial_scalar(s1, geom.a)
    S2, C2 = _axial_scalar(s2, geom.a - geom.L)
    if pol is Polarization.TE:
        return S1 * C2 - C1 * S2
    return s1 * S1 * C2 / eps.eps_I - s2 * S2 * C1 / eps.eps_II


def _cleared_residual_array(omega_sq, k_par_sq, pol, geom, eps):
    s1, s2 = _split(omega_sq, k_par_sq, eps)
    S1, C1 = axial_functions(s1, geom.a)
    S2, C2 = axial_functions(s2, geom.a - geom.L)
    if pol is Polarization.TE:
        return S1 * C2 - C1 * S2
    return s1 * S1 * C2 / eps.eps_I - s2 * S2 * C1 / eps.eps_II


def _refine(f, lo, hi):
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def _solution(omega_sq, mode, geom, eps) -> ModeSolution:
    k_par_sq = mode.k_par_sq(geom)
    s1, s2 = _split(omega_sq, k_par_sq, eps)
    return ModeSolution(s1, s2, math.sqrt(omega_sq), k_par_sq, mode.n_x * math.pi / geom.L)


def solve_mode(mode: ModeIndex, geom: CavityGeometry, eps: PermittivityPair,
               *, guess: float | None = None) -> ModeSolution:
    """Exact eigenfrequency of ``mode``.

    Without ``guess`` the cleared residual is scanned upward from
    ``k_par^2 / max(eps)`` (below the whole spectrum) and the root in position
    ``mode.branch`` is refined.  For fixed ``(k_y, k_z)`` and polarization the
    axial problem is a regular Sturm-Liouville problem, so roots are simple and
    their order is the homogeneous-cavity order.

    With ``guess`` (a squared frequency from a nearby parameter set) the root
    closest to it is tracked instead; see :func:`track_mode`.
    """
    k_par_sq = mode.k_par_sq(geom)

    def f(w):
        return _cleared_residual(w, k_par_sq, mode.pol, geom, eps)

    if guess is not None:
        return _solution(_track_root(f, guess), mode, geom, eps)

    eps_min, eps_max = sorted((eps.eps_I, eps.eps_II))
    step = SCAN_STEP * (math.pi / geom.L) ** 2
    bottom = k_par_sq / eps_max
    start = bottom - step if bottom > step else 0.5 * bottom
    # min-max bound on the requested eigenvalue
    top = ((mode.n_x * math.pi / geom.L) ** 2 + k_par_sq) / eps_min
    stop = top * (1.0 + 1e-9) + 2 * step

    roots: list[float] = []
    w0 = start
    f0 = f(w0)
    if f0 == 0.0:
        roots.append(w0)
    while w0 < stop and len(roots) <= mode.branch:
        grid = w0 + step * np.arange(1, _SCAN_CHUNK + 1)
        vals = _cleared_residual_array(grid, k_par_sq, mode.pol, geom, eps)
        xs = np.concatenate(([w0], grid))
        fs = np.concatenate(([f0], vals))
        for i in range(1, len(xs)):
            if fs[i] == 0.0:
                roots.append(float(xs[i]))
            elif fs[i - 1] * fs[i] < 0:
                roots.append(_refine(f, float(xs[i - 1]), float(xs[i])))
            if len(roots) > mode.branch:
                break
        w0, f0 = float(grid[-1]), float(vals[-1])
    if len(roots) <= mode.branch:
        raise RootNotBracketedError(
            f"{mode.label}: found {len(roots)} roots in omega^2 in [{start}, {w0}], "
            f"needed {mode.branch + 1}",
            interval=(start, w0),
        )
    return _solution(roots[mode.branch], mode, geom, eps)


def _track_root(f, guess: float, max_rel_width: float = 0.25) -> float:
    if not guess > 0:
        raise ContinuationError(f"guess must be positive, got {guess}")
    width = 1e-8 * guess
    while width <= max_rel_width * guess:
        lo, hi = guess - width, guess + width
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi < 0:
            return _refine(f, lo, hi)
        width *= 4.0
    raise ContinuationError(f"no root within {max_rel_width:.0%} of omega^2 = {guess}")


def track_mode(mode: ModeIndex, geom: CavityGeometry, eps_path) -> list[ModeSolution]:
    """Follow one root along a sequence of permittivity pairs.

    The first point is solved by scanning; every later point starts from the
    previous root, so steps must be small compared with the root spacing.
    """
    eps_path = list(eps_path)
    sols = [solve_mode(mode, geom, eps_path[0])]
    for eps in eps_path[1:]:
        sols.append(solve_mode(mode, geom, eps, guess=sols[-1].omega_sq))
    return sols


def homogeneous_omega(mode: ModeIndex, geom: CavityGeometry, eps: float) -> float:
    _, _, k_perp = mode.wavenumbers(geom)
    return math.sqrt((k_perp * k_perp + mode.k_par_sq(geom)) / eps)


def physical_modes(geom: CavityGeometry, n_max: int):
    """All mode labels with a non-vanishing field and indices up to ``n_max``."""
    for n_x in range(n_max + 1):
        for n_y in range(n_max + 1):
            for n_z in range(n_max + 1):
                if (n_y == 0 and n_z == 0) or sum(n > 0 for n in (n_x, n_y, n_z)) < 2:
                    continue
                for pol in Polarization:
                    if pol is Polarization.TE and n_x == 0:
                        continue
                    mode = ModeIndex(n_x, n_y, n_z, pol)
                    if mode.has_field:
                        yield mode


def lowest_modes(geom: CavityGeometry, eps: PermittivityPair, count: int):
    """The ``count`` lowest physical eigenmodes as ``(ModeIndex, ModeSolution)`` pairs.

    Each exact eigenvalue lies in ``[lam / eps_max, lam / eps_min]`` where
    ``lam`` is its homogeneous (unit permittivity) value, which bounds the
    candidate set.
    """
    eps_min, eps_max = sorted((eps.eps_I, eps.eps_II))
    n_max = 2
    while True:
        lams = sorted(homogeneous_omega(m, geom, 1.0) ** 2 for m in physical_modes(geom, n_max))
        if len(lams) >= count:
            upper = lams[count - 1] / eps_min
            edge = (n_max + 1) ** 2 * math.pi**2 / max(geom.L, geom.L_y, geom.L_z) ** 2
            if edge / eps_max > upper:
                break
        n_max += 1
    candidates = [m for m in physical_modes(geom, n_max)
                  if homogeneous_omega(m, geom, 1.0) ** 2 / eps_max <= upper]
    solved = [(m, solve_mode(m, geom, eps)) for m in candidates]
    solved.sort(key=lambda ms: (ms[1].omega, ms[0].n_x, ms[0].n_y, ms[0].n_z, ms[0].pol.value))
    return solved[:count]


# --------------------------------------------------------------------------
# Mode functions


def _perp_weights(n: int, length: float) -> tuple[float, float]:
    """(int cos^2, int sin^2) over [0, length]."""
    return (0.5 * length, 0.5 * length) if n > 0 else (length, 0.0)


def _int_cc(sa: float, sb: float, d: float) -> float:
    """int_0^d C_a C_b dx via product-to-sum with complex wavenumbers."""
    ka = np.sqrt(complex(sa))
    kb = np.sqrt(complex(sb))

    def sinc(z):
        return 1.0 - z * z / 6.0 if abs(z) < 1e-6 else np.sin(z) / z

    return float((0.5 * d * (sinc((ka - kb) * d) + sinc((ka + kb) * d))).real)


def _int_ss(sa: float, sb: float, d: float) -> float:
    """int_0^d S_a S_b dx."""
    if max(abs(sa), abs(sb)) * d * d < 0.5:
        total = 0.0
        ca = 1.0
        for n in range(14):
            cb = 1.0
            for m in range(14):
                p = 2 * n + 2 * m + 3
                total += ca * cb * d**p / p
                cb *= -sb / ((2 * m + 2) * (2 * m + 3))
            ca *= -sa / ((2 * n + 2) * (2 * n + 3))
        return total
    if abs(sa) > abs(sb):
        sa, sb = sb, sa
    Sa, _ = _axial_scalar(sa, d)
    _, Cb = _axial_scalar(sb, d)
    return (_int_cc(sa, sb, d) - Sa * Cb) / sb


@dataclass(frozen=True)
class ModeFunction:
    """Normalized dual-potential eigenmode.

    ``pol_I`` / ``pol_II`` are the coefficients ``(A_x, A_y, A_z)`` multiplying
    ``(S, C, C)`` in each region (unit vector, sign fixed so the largest
    ``pol_II`` entry is positive); ``norm`` scales them to unit L2 norm.
    """

    solution: ModeSolution
    pol_I: tuple[float, float, float]
    pol_II: tuple[float, float, float]
    norm: float
    mode: ModeIndex
    geom: CavityGeometry
    eps: PermittivityPair

    @property
    def amplitudes(self) -> tuple[np.ndarray, np.ndarray]:
        return self.norm * np.asarray(self.pol_I), self.norm * np.asarray(self.pol_II)

    def _axial(self, x):
        x = np.asarray(x, dtype=float)
        inside = x <= self.geom.a
        S1, C1 = axial_functions(self.solution.s_I, x)
        S2, C2 = axial_functions(self.solution.s_II, x - self.geom.L)
        A1, A2 = self.amplitudes
        S = np.where(inside, S1, S2)
        C = np.where(inside, C1, C2)
        s = np.where(inside, self.solution.s_I, self.solution.s_II)
        A = [np.where(inside, A1[i], A2[i]) for i in range(3)]
        return S, C, s, A

    def __call__(self, x, y, z) -> np.ndarray:
        """Field components, stacked on the first axis."""
        k_y, k_z, _ = self.mode.wavenumbers(self.geom)
        x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
        S, C, _, A = self._axial(x)
        cy, sy, cz, sz = np.cos(k_y * y), np.sin(k_y * y), np.cos(k_z * z), np.sin(k_z * z)
        return np.stack([A[0] * S * cy * cz, A[1] * C * sy * cz, A[2] * C * cy * sz])

    def curl(self, x, y, z) -> np.ndarray:
        """``curl f``, i.e. the displacement field D of the mode."""
        k_y, k_z, _ = self.mode.wavenumbers(self.geom)
        x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
        S, C, s, A = self._axial(x)
        cy, sy, cz, sz = np.cos(k_y * y), np.sin(k_y * y), np.cos(k_z * z), np.sin(k_z * z)
        return np.stack([
            C * sy * sz * (k_z * A[1] - k_y * A[2]),
            S * cy * sz * (-k_z * A[0] + s * A[2]),
            S * sy * cz * (k_y * A[0] - s * A[1]),
        ])


def _interface_system(sol: ModeSolution, mode: ModeIndex, geom: CavityGeometry,
                      eps: PermittivityPair) -> np.ndarray:
    k_y, k_z, _ = mode.wavenumbers(geom)
    s1, s2 = sol.s_I, sol.s_II
    S1, C1 = _axial_scalar(s1, geom.a)
    S2, C2 = _axial_scalar(s2, geom.a - geom.L)
    e1, e2 = eps.eps_I, eps.eps_II
    # unknowns: (A1x, A1y, A1z, A2x, A2y, A2z)
    rows = [
        [1, k_y, k_z, 0, 0, 0],                                   # div f = 0, region I
        [0, 0, 0, 1, k_y, k_z],                                   # div f = 0, region II
        [S1, 0, 0, -S2, 0, 0],                                    # f_x continuous
        [0, C1, 0, 0, -C2, 0],                                    # f_y continuous
        [0, 0, C1, 0, 0, -C2],                                    # f_z continuous
        [0, k_z * C1, -k_y * C1, 0, -k_z * C2, k_y * C2],         # (curl f)_x continuous
        [-k_z * S1 / e1, 0, s1 * S1 / e1, k_z * S2 / e2, 0, -s2 * S2 / e2],  # (curl f)_y / eps
        [k_y * S1 / e1, -s1 * S1 / e1, 0, -k_y * S2 / e2, s2 * S2 / e2, 0],  # (curl f)_z / eps
    ]
    if mode.pol is Polarization.TE:
        rows += [[0, k_z, -k_y, 0, 0, 0], [0, 0, 0, 0, k_z, -k_y]]
    else:
        rows += [[1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0]]
    # components whose transverse factor vanishes identically carry no field
    if k_y == 0:
        rows += [[0, 1, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0]]
    if k_z == 0:
        rows += [[0, 0, 1, 0, 0, 0], [0, 0, 0, 0, 0, 1]]
    m = np.array(rows, dtype=float)
    norms = np.linalg.norm(m, axis=1)
    return m[norms > 0] / norms[norms > 0, None]


def _raw_norm_sq(sol: ModeSolution, mode: ModeIndex, geom: CavityGeometry, A1, A2) -> float:
    return _region_products(sol, sol, mode, geom, A1, A2, A1, A2)


def _region_products(sa, sb, mode, geom, A1a, A2a, A1b, A2b) -> float:
    yc, ys = _perp_weights(mode.n_y, geom.L_y)
    zc, zs = _perp_weights(mode.n_z, geom.L_z)
    total = 0.0
    for d, s_a, s_b, Aa, Ab in (
        (geom.a, sa.s_I, sb.s_I, A1a, A1b),
        (geom.L - geom.a, sa.s_II, sb.s_II, A2a, A2b),
    ):
        cc = _int_cc(s_a, s_b, d)
        ss = _int_ss(s_a, s_b, d) if Aa[0] != 0 and Ab[0] != 0 else 0.0
        total += Aa[0] * Ab[0] * ss * yc * zc
        total += Aa[1] * Ab[1] * cc * ys * zc
        total += Aa[2] * Ab[2] * cc * yc * zs
    return total


def build_mode_function(sol: ModeSolution, mode: ModeIndex, geom: CavityGeometry,
                        eps: PermittivityPair) -> ModeFunction:
    """Polarization amplitudes from the interface conditions, normalized to 1."""
    if not mode.has_field:
        raise InvalidModeError(f"{mode.label} has no non-vanishing field (TM needs n_y, n_z > 0)")
    system = _interface_system(sol, mode, geom, eps)
    _, sv, vt = np.linalg.svd(system)
    sv = np.concatenate([sv, np.zeros(6 - len(sv))])
    if sv[-1] > 1e-9 * sv[0]:
        raise ValueError(f"{mode.label}: interface conditions not satisfiable (sigma_min={sv[-1]:.3g});"
                         " solution is not an eigenmode")
    if sv[-2] < 1e-6 * sv[0]:
        raise InvalidModeError(f"{mode.label}: degenerate interface system")
    v = vt[-1]
    mag = np.abs(v[3:])
    # first entry within rounding of the maximum: ties occur e.g. for k_y = k_z
    lead = int(np.argmax(mag >= (1.0 - 1e-6) * mag.max()))
    if v[3 + lead] < 0:
        v = -v
    A1, A2 = v[:3], v[3:]
    norm = 1.0 / math.sqrt(_raw_norm_sq(sol, mode, geom, A1, A2))
    return ModeFunction(sol, tuple(map(float, A1)), tuple(map(float, A2)), norm, mode, geom, eps)


def mode_function(mode: ModeIndex, geom: CavityGeometry, eps: PermittivityPair) -> ModeFunction:
    return build_mode_function(solve_mode(mode, geom, eps), mode, geom, eps)


def _inner(fa: ModeFunction, fb: ModeFunction) -> float:
    if fa.geom != fb.geom:
        raise ValueError("mode functions belong to different geometries")
    if (fa.mode.n_y, fa.mode.n_z) != (fb.mode.n_y, fb.mode.n_z):
        return 0.0
    A1a, A2a = fa.amplitudes
    A1b, A2b = fb.amplitudes
    return _region_products(fa.solution, fb.solution, fa.mode, fa.geom, A1a, A2a, A1b, A2b)


def overlap(fa: ModeFunction, fb: ModeFunction) -> float:
    """``int f_a . f_b d^3r`` from closed-form per-region integrals."""
    if fa.eps != fb.eps:
        raise ValueError("mode functions belong to different permittivities")
    if fa.mode == fb.mode:
        return _inner(fa, fb)
    # symmetrize against rounding in the near-degenerate branch of _int_ss
    return 0.5 * (_inner(fa, fb) + _inner(fb, fa))


def gram_matrix(functions) -> np.ndarray:
    functions = list(functions)
    n = len(functions)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = overlap(functions[i], functions[j])
    return g


def instantaneous_permittivity(t: float, drive: DriveSpec) -> PermittivityPair:
    return PermittivityPair(drive.eps_II / drive_ratio(t, drive), drive.eps_II)


def coupling_matrix_element(alpha: ModeIndex, beta: ModeIndex, geom: CavityGeometry,
                            drive: DriveSpec, t: float, h: float | None = None,
                            *, check_step: bool = True) -> float:
    """``M_ab(t) = int f_a(t) . d/dt f_b(t) d^3r`` by central differences in time.

    ``f_b(t +- h)`` is rebuilt at the permittivity ratio of ``t +- h``.  With
    ``check_step`` the estimate is repeated at ``h / 2`` and a relative change
    above 1% raises :class:`StepRefinementError`.
    """
    if h is None:
        h = 1e-6 * drive.period
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    eps_t = instantaneous_permittivity(t, drive)
    sol_a = solve_mode(alpha, geom, eps_t)
    fa = build_mode_function(sol_a, alpha, geom, eps_t)
    sol_b = sol_a if beta == alpha else solve_mode(beta, geom, eps_t)

    def estimate(step):
        values = []
        for tt in (t + step, t - step):
            eps = instantaneous_permittivity(tt, drive)
            sol = solve_mode(beta, geom, eps, guess=sol_b.omega_sq)
            values.append(_inner(fa, build_mode_function(sol, beta, geom, eps)))
        return (values[0] - values[1]) / (2.0 * step)

    m = estimate(h)
    if check_step:
        m_half = estimate(0.5 * h)
        if abs(m - m_half) > max(1e-2 * abs(m), M_NOISE_FLOOR):
            raise StepRefinementError(f"M[{alpha.label},{beta.label}] changed from {m} to {m_half} "
                                      f"under h -> h/2 (h={h})")
    return m
