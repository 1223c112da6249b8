import math

import numpy as np
import pytest

from dce_cavity.drive import DriveSpec
from dce_cavity.errors import (
    InvalidModeError,
    PoleProximityError,
    RootNotBracketedError,
)
from dce_cavity.mode_solver import (
    CavityGeometry,
    ModeIndex,
    PermittivityPair,
    axial_functions,
    axial_kernel,
    build_mode_function,
    coupling_matrix_element,
    dispersion_residual,
    gram_matrix,
    homogeneous_omega,
    lowest_modes,
    mode_function,
    overlap,
    solve_mode,
    track_mode,
)
from dce_cavity.quadrature import quadrature_gram, tensor_grid

PI = math.pi


# ---------------------------------------------------------------- oracles


def _det_oracle(omega_sq, mode, geom, eps):
    """Interface determinant in complex arithmetic (independent of the solver)."""
    kpar = mode.k_par_sq(geom)
    k1 = np.sqrt(complex(eps.eps_I * omega_sq - kpar))
    k2 = np.sqrt(complex(eps.eps_II * omega_sq - kpar))
    u1, u2 = geom.a, geom.a - geom.L
    if mode.pol == "TE":
        # psi = sin(k (x - wall)) / k, continuity of psi and psi'
        m = [[np.sin(k1 * u1) / k1, -np.sin(k2 * u2) / k2], [np.cos(k1 * u1), -np.cos(k2 * u2)]]
    else:
        # psi = cos(k (x - wall)), continuity of psi and psi' / eps
        m = [[np.cos(k1 * u1), -np.cos(k2 * u2)],
             [-k1 * np.sin(k1 * u1) / eps.eps_I, k2 * np.sin(k2 * u2) / eps.eps_II]]
    return (m[0][0] * m[1][1] - m[0][1] * m[1][0]).real


def _oracle_roots(mode, geom, eps, lo, hi, step):
    w = np.arange(lo, hi, step)
    f = np.array([_det_oracle(x, mode, geom, eps) for x in w])
    roots = []
    for i in np.nonzero(f[:-1] * f[1:] < 0)[0]:
        a, b = w[i], w[i + 1]
        fa = f[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = _det_oracle(m, mode, geom, eps)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return roots


# ---------------------------------------------------------------- types


def test_geometry_rejects_slab_outside():
    with pytest.raises(ValueError):
        CavityGeometry(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CavityGeometry(1.0, -1.0, 1.0, 0.1)


def test_permittivity_must_be_positive():
    with pytest.raises(ValueError):
        PermittivityPair(0.0, 1.0)
    assert PermittivityPair.from_ratio(2.0, 1.0).eps_I == pytest.approx(0.5)


@pytest.mark.parametrize("idx", [(0, 0, 1), (1, 0, 0), (0, 1, 0), (3, 0, 0)])
def test_mode_index_rejects_vanishing(idx):
    with pytest.raises(InvalidModeError):
        ModeIndex(*idx, "TM")


def test_te_needs_nx():
    with pytest.raises(InvalidModeError):
        ModeIndex(0, 1, 1, "TE")
    assert ModeIndex(0, 1, 1, "TM").branch == 0
    assert ModeIndex(2, 1, 1, "TE").branch == 1


def test_tm_without_both_perp_indices_has_no_field(cube, slab_eps):
    m = ModeIndex(1, 1, 0, "TM")
    assert not m.has_field
    with pytest.raises(InvalidModeError):
        mode_function(m, cube, slab_eps)


# ---------------------------------------------------------------- axial kernel


def test_axial_kernel_examples():
    assert axial_kernel(0.0, 0.3) == 0.3
    assert axial_kernel(PI**2, 0.25) == pytest.approx(1.0 / PI, rel=1e-14)
    assert axial_kernel(-1.0, 1.0) == pytest.approx(math.tanh(1.0), rel=1e-14)


def test_axial_kernel_small_d_series():
    s, d = PI**2, 1e-3
    series = d + s * d**3 / 3 + 2 * s**2 * d**5 / 15
    assert axial_kernel(s, d) == pytest.approx(series, rel=1e-12)


def test_axial_kernel_pole():
    with pytest.raises(PoleProximityError):
        axial_kernel((PI / 2) ** 2, 1.0)


def test_axial_functions_continue_through_zero():
    u = np.linspace(-1, 1, 11)
    for s in (1e-14, -1e-14):
        S, C = axial_functions(s, u)
        np.testing.assert_allclose(S, u, atol=1e-13)
        np.testing.assert_allclose(C, 1.0, atol=1e-13)


# ---------------------------------------------------------------- dispersion


def test_residual_homogeneous_root():
    g = CavityGeometry(1.0, 0.7, 1.0, 0.2)
    m = ModeIndex(1, 1, 0, "TE")
    w2 = PI**2 * (1 + 1 / 0.7**2)
    assert abs(dispersion_residual(w2, m, g, PermittivityPair(1.0, 1.0))) < 1e-12


def test_residual_brackets_single_tm_root(cube, slab_eps):
    m = ModeIndex(1, 1, 0, "TM")
    w = np.arange(1.9 * PI**2, 2.1 * PI**2, 1e-4 * PI**2)
    f = np.array([_det_oracle(x, m, cube, slab_eps) for x in w])
    changes = np.nonzero(f[:-1] * f[1:] < 0)[0]
    assert len(changes) == 1
    sol = solve_mode(m, cube, slab_eps)
    assert w[changes[0]] <= sol.omega_sq <= w[changes[0] + 1]


def test_residual_rejects_nonpositive(cube, slab_eps):
    with pytest.raises(ValueError):
        dispersion_residual(0.0, ModeIndex(1, 1, 1, "TE"), cube, slab_eps)


# ---------------------------------------------------------------- solve_mode


@pytest.mark.parametrize("eps", [1.0, 2.5])
def test_homogeneous_te210(eps):
    g = CavityGeometry(1.3, 0.8, 1.0, 0.4)
    sol = solve_mode(ModeIndex(2, 1, 0, "TE"), g, PermittivityPair(eps, eps))
    assert sol.s_II == pytest.approx((2 * PI / g.L) ** 2, rel=1e-12)
    assert sol.omega == pytest.approx(math.sqrt((4 * PI**2 / g.L**2 + PI**2 / g.L_y**2) / eps), rel=1e-12)


def test_tm110_first_order_wavenumber(cube, slab_eps):
    sol = solve_mode(ModeIndex(1, 1, 0, "TM"), cube, slab_eps)
    assert abs(sol.kx_II - 1.01 * PI) < 3e-4 * PI


@pytest.mark.parametrize("label", [(1, 1, 1, "TE"), (2, 1, 1, "TE"), (0, 1, 1, "TM"),
                                   (1, 1, 1, "TM"), (3, 1, 2, "TM")])
def test_solver_matches_dense_scan_oracle(label, cube, slab_eps):
    mode = ModeIndex(*label)
    kpar = mode.k_par_sq(cube)
    # all roots of this (k_y, k_z, pol) family below the requested one
    hi = ((mode.n_x + 0.5) * PI) ** 2 / slab_eps.eps_I + kpar / slab_eps.eps_I
    roots = _oracle_roots(mode, cube, slab_eps, kpar * 1.0000001, hi, 1e-4 * PI**2)
    sol = solve_mode(mode, cube, slab_eps)
    assert sol.omega_sq == pytest.approx(roots[mode.branch], rel=1e-10)


def test_eigenvalue_consistency(cube, slab_eps):
    m = ModeIndex(2, 1, 3, "TM")
    sol = solve_mode(m, cube, slab_eps)
    assert slab_eps.eps_I * sol.omega_sq - sol.s_I == pytest.approx(sol.k_par_sq, rel=1e-12)
    assert slab_eps.eps_II * sol.omega_sq - sol.s_II == pytest.approx(sol.k_par_sq, rel=1e-12)


def test_mode_pulled_into_dense_slab(cube):
    """A strongly polarizable slab lowers Omega and concentrates the field."""
    m = ModeIndex(1, 1, 1, "TM")
    dense = PermittivityPair(100.0, 1.0)
    sol = solve_mode(m, cube, dense)
    assert sol.s_I > 100 * sol.s_II
    assert sol.omega < homogeneous_omega(m, cube, 1.0) * (1 - 5e-3)

    def slab_share(eps):
        f = mode_function(m, cube, eps)
        X, Y, Z, W = tensor_grid(cube, 48)
        density = W * np.sum(f(X, Y, Z) ** 2, axis=0)
        return density[X < cube.a].sum()

    assert slab_share(dense) > 1.2 * slab_share(PermittivityPair(1.0, 1.0))


def test_fundamental_tm_evanescent_in_bulk(cube):
    sol = solve_mode(ModeIndex(0, 1, 1, "TM"), cube, PermittivityPair(100.0, 1.0))
    assert sol.s_II < 0 < sol.s_I


def test_total_reflection_regime(cube):
    for pol in ("TE", "TM"):
        sol = solve_mode(ModeIndex(1, 1, 1, pol), cube, PermittivityPair(0.01, 1.0))
        assert sol.s_I < 0


def test_root_not_bracketed_reports_interval(cube, slab_eps, monkeypatch):
    import dce_cavity.mode_solver as ms

    monkeypatch.setattr(ms, "_cleared_residual_array", lambda w, *a: np.ones_like(w))
    monkeypatch.setattr(ms, "_cleared_residual", lambda w, *a: 1.0)
    with pytest.raises(RootNotBracketedError) as info:
        solve_mode(ModeIndex(1, 1, 1, "TE"), cube, slab_eps)
    lo, hi = info.value.interval
    assert 0 < lo < hi


def test_continuation_agrees_with_ordered_labelling(cube):
    """Walking eps_I from the homogeneous value keeps the root order."""
    path = [PermittivityPair(e, 1.0) for e in np.linspace(1.0, 40.0, 100)]
    for label in [(1, 1, 1, "TM"), (2, 1, 1, "TE"), (0, 1, 1, "TM")]:
        m = ModeIndex(*label)
        tracked = track_mode(m, cube, path)[-1]
        assert tracked.omega_sq == pytest.approx(solve_mode(m, cube, path[-1]).omega_sq, rel=1e-12)


def test_lowest_modes_homogeneous_cube():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.3)
    pairs = lowest_modes(g, PermittivityPair(1.0, 1.0), 10)
    for m, s in pairs:
        assert s.omega == pytest.approx(PI * math.sqrt(m.n_x**2 + m.n_y**2 + m.n_z**2), rel=1e-12)
    # 3 x TE/TM-degenerate (1,1,0)-type at pi*sqrt(2), 2 at pi*sqrt(3), ...
    omegas = [s.omega for _, s in pairs]
    assert omegas == sorted(omegas)
    assert sum(abs(w - PI * math.sqrt(2)) < 1e-9 for w in omegas) == 3
    assert sum(abs(w - PI * math.sqrt(3)) < 1e-9 for w in omegas) == 2


# ---------------------------------------------------------------- mode functions


def _interface_residuals(f, n=100):
    g = f.geom
    y, z = np.meshgrid(np.linspace(0, g.L_y, n), np.linspace(0, g.L_z, n), indexing="ij")
    lo, hi = g.a * (1 - 1e-15), g.a * (1 + 1e-15)
    fl, fr = f(np.full_like(y, lo), y, z), f(np.full_like(y, hi), y, z)
    cl, cr = f.curl(np.full_like(y, lo), y, z), f.curl(np.full_like(y, hi), y, z)
    e1, e2 = f.eps.eps_I, f.eps.eps_II
    # Lambda continuous; D_x continuous; E_par = D_par / eps continuous
    return max(np.abs(fl - fr).max(), np.abs(cl[0] - cr[0]).max(),
               np.abs(cl[1:] / e1 - cr[1:] / e2).max())


@pytest.mark.parametrize("label", [(1, 1, 1, "TE"), (1, 1, 1, "TM"), (0, 1, 1, "TM"),
                                   (1, 1, 0, "TE"), (2, 0, 1, "TE"), (2, 3, 1, "TM")])
def test_mode_function_invariants(label, cube, slab_eps):
    f = mode_function(ModeIndex(*label), cube, slab_eps)
    assert _interface_residuals(f) < 1e-10
    k_y, k_z, _ = f.mode.wavenumbers(cube)
    for A in f.pol_I, f.pol_II:
        assert abs(A[0] + k_y * A[1] + k_z * A[2]) < 1e-12 * (1 + k_y + k_z)
    assert overlap(f, f) == pytest.approx(1.0, abs=1e-10)
    assert quadrature_gram([f], 48)[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_divergence_free_by_finite_differences(cube, slab_eps):
    f = mode_function(ModeIndex(2, 1, 1, "TM"), cube, slab_eps)
    rng = np.random.default_rng(0)
    h = 1e-5
    for _ in range(20):
        x, y, z = rng.uniform(0.02, 0.98, 3)
        div = ((f(x + h, y, z)[0] - f(x - h, y, z)[0]) + (f(x, y + h, z)[1] - f(x, y - h, z)[1])
               + (f(x, y, z + h)[2] - f(x, y, z - h)[2])) / (2 * h)
        assert abs(div) < 1e-7


def test_te_has_no_normal_displacement():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.3)
    f = mode_function(ModeIndex(1, 2, 1, "TE"), g, PermittivityPair(1.0, 1.0))
    y, z = np.meshgrid(np.linspace(0, 1, 20), np.linspace(0, 1, 20))
    assert np.abs(f.curl(np.full_like(y, g.a), y, z)[0]).max() < 1e-12


def test_sign_convention_largest_component_positive(cube, slab_eps):
    for label in [(0, 1, 1, "TM"), (1, 1, 1, "TE"), (1, 2, 1, "TM")]:
        f = mode_function(ModeIndex(*label), cube, slab_eps)
        A2 = np.asarray(f.pol_II)
        assert A2[np.argmax(np.abs(A2) >= (1 - 1e-6) * np.abs(A2).max())] > 0


def test_build_rejects_non_eigenvalue(cube, slab_eps):
    m = ModeIndex(1, 1, 1, "TM")
    sol = solve_mode(m, cube, slab_eps)
    from dataclasses import replace

    bad = replace(sol, s_I=sol.s_I * 1.01, s_II=sol.s_II * 1.01, omega=sol.omega * 1.01)
    with pytest.raises(ValueError):
        build_mode_function(bad, m, cube, slab_eps)


# ---------------------------------------------------------------- overlaps


def test_distinct_tm_overlap_vanishes(cube, slab_eps):
    fa = mode_function(ModeIndex(1, 1, 1, "TM"), cube, slab_eps)
    fb = mode_function(ModeIndex(2, 1, 1, "TM"), cube, slab_eps)
    assert abs(overlap(fa, fb)) < 1e-8
    assert abs(quadrature_gram([fa, fb], 64)[0, 1]) < 1e-8


def test_different_perp_indices_exactly_orthogonal(cube, slab_eps):
    fa = mode_function(ModeIndex(1, 1, 1, "TM"), cube, slab_eps)
    fb = mode_function(ModeIndex(1, 2, 1, "TM"), cube, slab_eps)
    assert overlap(fa, fb) == 0.0


def test_gram_closed_form_matches_quadrature():
    g = CavityGeometry(1.0, 0.9, 0.8, 0.05)
    eps = PermittivityPair(0.5, 1.0)
    funcs = [build_mode_function(s, m, g, eps) for m, s in lowest_modes(g, eps, 10)]
    closed = gram_matrix(funcs)
    np.testing.assert_allclose(closed, np.eye(10), atol=1e-8)
    np.testing.assert_allclose(closed, quadrature_gram(funcs, 64), atol=1e-6)


def test_overlap_requires_same_permittivity(cube):
    fa = mode_function(ModeIndex(1, 1, 1, "TM"), cube, PermittivityPair(0.5, 1.0))
    fb = mode_function(ModeIndex(1, 1, 1, "TM"), cube, PermittivityPair(0.6, 1.0))
    with pytest.raises(ValueError):
        overlap(fa, fb)


# ---------------------------------------------------------------- coupling


def _drive(chi=0.1):
    return DriveSpec(1.0, chi, 2 * PI * math.sqrt(3), 1.0)


def _fd_oracle(alpha, beta, geom, drive, t, h):
    """Fourth-order five-point stencil on a fresh solve at every time."""
    from dce_cavity.mode_solver import instantaneous_permittivity

    def f(tt):
        eps = instantaneous_permittivity(tt, drive)
        return mode_function(beta, geom, eps)

    eps_t = instantaneous_permittivity(t, drive)
    fa = mode_function(alpha, geom, eps_t)
    from dce_cavity.mode_solver import _inner

    vals = [_inner(fa, f(t + k * h)) for k in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def test_coupling_matches_independent_stencil():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.05)
    drive = _drive()
    a, b = ModeIndex(1, 1, 1, "TM"), ModeIndex(2, 1, 1, "TM")
    m = coupling_matrix_element(a, b, g, drive, 0.13)
    assert m == pytest.approx(_fd_oracle(a, b, g, drive, 0.13, 1e-4), rel=1e-4)


def test_coupling_diagonal_and_static():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.05)
    a = ModeIndex(1, 1, 1, "TM")
    assert abs(coupling_matrix_element(a, a, g, _drive(), 0.2)) < 1e-8
    b = ModeIndex(0, 1, 1, "TM")
    assert coupling_matrix_element(a, b, g, _drive(0.0), 0.2) == 0.0


def test_coupling_antisymmetric():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.05)
    a, b = ModeIndex(0, 1, 1, "TM"), ModeIndex(2, 1, 1, "TM")
    m_ab = coupling_matrix_element(a, b, g, _drive(), 0.31)
    m_ba = coupling_matrix_element(b, a, g, _drive(), 0.31)
    assert abs(m_ab + m_ba) < 1e-6
    assert abs(m_ab) > 1e-3


def test_coupling_scaling_tm_linear_te_cubic():
    base = CavityGeometry(1.0, 1.0, 1.0, 0.01)
    drive = _drive()
    tm = (ModeIndex(1, 1, 1, "TM"), ModeIndex(2, 1, 1, "TM"))
    te = (ModeIndex(1, 1, 1, "TE"), ModeIndex(2, 1, 1, "TE"))
    r_tm = (coupling_matrix_element(*tm, base.with_a_over_L(1e-2), drive, 0.0)
            / coupling_matrix_element(*tm, base.with_a_over_L(1e-3), drive, 0.0))
    assert r_tm == pytest.approx(10.0, rel=0.2)
    r_te = (coupling_matrix_element(*te, base.with_a_over_L(0.1), drive, 0.0)
            / coupling_matrix_element(*te, base.with_a_over_L(0.02), drive, 0.0))
    assert math.log(r_te) / math.log(5.0) == pytest.approx(3.0, abs=0.3)


def test_te_tm_coupling_vanishes():
    g = CavityGeometry(1.0, 1.0, 1.0, 0.05)
    m = coupling_matrix_element(ModeIndex(1, 1, 1, "TE"), ModeIndex(1, 1, 1, "TM"), g, _drive(), 0.1)
    assert abs(m) < 1e-6
