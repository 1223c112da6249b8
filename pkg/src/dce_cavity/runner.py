"""Execute a scenario and write its manifest and CSV tables."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, dump_config
from .drive import resonance_frequency
from .dynamics import (
    WRONSKIAN_TOL,
    base_omega,
    evolve_bogoliubov,
    fitted_growth_rate,
    modulation_depth,
    squeezing_rate,
)
from .errors import ResidualUnderflowError
from .estimate import estimate_physical, wavelength_for_switching_time
from .mode_solver import (
    M_NOISE_FLOOR,
    POLE_TOL,
    SCAN_STEP,
    PermittivityPair,
    Polarization,
    build_mode_function,
    coupling_matrix_element,
    gram_matrix,
    homogeneous_omega,
    lowest_modes,
    solve_mode,
)
from .perturbation import UNDERFLOW_FLOOR, delta_omega2_tm, error_order_fit, kx_first_order
from .quadrature import quadrature_gram

TOLERANCES = {
    "root_rtol": 4 * float(np.finfo(float).eps),
    "scan_step_pi_over_L_sq": SCAN_STEP,
    "pole_tol": POLE_TOL,
    "wronskian_tol": WRONSKIAN_TOL,
    "coupling_noise_floor": M_NOISE_FLOOR,
    "residual_underflow_floor": UNDERFLOW_FLOOR,
}


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    tables: dict[str, Table]
    summary: dict


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_outputs(result: ScenarioResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, table in result.tables.items():
        path = out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(table.columns)
            writer.writerows([_fmt(v) for v in row] for row in table.rows)
        paths[name] = path
    manifest = {
        "tool": "dce_cavity",
        "version": __version__,
        "scenario": dump_config(result.config),
        "tolerances": TOLERANCES,
        "outputs": {name: p.name for name, p in paths.items()},
        "summary": result.summary,
    }
    paths["manifest"] = out / "manifest.json"
    paths["manifest"].write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return paths


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# spectrum


def _solve_item(item):
    mode, geom, eps = item
    return solve_mode(mode, geom, eps)


def _spectrum(cfg: ScenarioConfig) -> ScenarioResult:
    geom, eps = cfg.geometry.build(), cfg.permittivities.build()
    n = cfg.numerics
    if cfg.modes:
        modes = [m.build() for m in cfg.modes]
        sols = _map(_solve_item, [(m, geom, eps) for m in modes], n.workers)
    else:
        pairs = lowest_modes(geom, eps, n.lowest)
        modes, sols = [p[0] for p in pairs], [p[1] for p in pairs]

    spectrum = Table(["mode", "n_x", "n_y", "n_z", "pol", "s_I [1/length^2]", "s_II [1/length^2]",
                      "omega [1/length]", "omega_homogeneous [1/length]", "k_par_sq [1/length^2]"])
    for m, s in zip(modes, sols):
        spectrum.rows.append((m.label, m.n_x, m.n_y, m.n_z, m.pol.value, s.s_I, s.s_II, s.omega,
                              homogeneous_omega(m, geom, eps.eps_II), s.k_par_sq))
    tables = {"spectrum": spectrum}
    summary = {"modes": len(modes)}

    if n.gram:
        funcs = [build_mode_function(s, m, geom, eps) for m, s in zip(modes, sols) if m.has_field]
        closed = gram_matrix(funcs)
        cols = ["mode_a", "mode_b", "closed_form"]
        quad = None
        if n.quadrature_points:
            quad = quadrature_gram(funcs, n.quadrature_points)
            cols.append("quadrature")
        gram = Table(cols)
        for i, fa in enumerate(funcs):
            for j, fb in enumerate(funcs):
                row = (fa.mode.label, fb.mode.label, closed[i, j])
                gram.rows.append(row + ((quad[i, j],) if quad is not None else ()))
        tables["gram"] = gram
        summary["gram_max_identity_deviation"] = float(np.abs(closed - np.eye(len(funcs))).max())
        if quad is not None:
            summary["gram_max_quadrature_deviation"] = float(np.abs(closed - quad).max())

    if n.coupling_phases is not None:
        tables["coupling"] = _coupling_table(cfg, geom, [m for m in modes if m.has_field])
    return ScenarioResult(cfg, tables, summary)


def _coupling_table(cfg, geom, modes) -> Table:
    d = cfg.drive
    omega = d.omega_drive or resonance_frequency(
        base_omega(modes[0], geom, d.xi, d.eps_II, "exact"), d.delta)
    drive = d.build(omega)
    table = Table(["a_over_L", "phase [rad]", "mode_a", "mode_b", "M [1/time]"])
    for a_over_L in cfg.numerics.a_over_L or [geom.a_over_L]:
        g = geom.with_a_over_L(a_over_L)
        for phase in cfg.numerics.coupling_phases:
            t = phase / drive.omega_drive
            for ma in modes:
                for mb in modes:
                    table.rows.append((a_over_L, phase, ma.label, mb.label,
                                       coupling_matrix_element(ma, mb, g, drive, t)))
    return table


# --------------------------------------------------------------------------
# sweep


def _sweep_point(item):
    mode, geom, a_over_L, ratio, eps_II = item
    g = geom.with_a_over_L(a_over_L)
    eps = PermittivityPair.from_ratio(ratio, eps_II)
    sol = solve_mode(mode, g, eps)
    w0_sq = homogeneous_omega(mode, g, eps_II) ** 2
    if mode.n_x >= 1:
        kx_first = kx_first_order(mode, g, eps)
        residual = abs(sol.kx_II - kx_first)
    else:
        kx_first = residual = math.nan
    if mode.pol is Polarization.TM:
        shift_first = delta_omega2_tm(mode, g, eps_II, ratio)
    else:
        shift_first = 0.0
    return (mode.label, a_over_L, ratio, sol.kx_II, kx_first, residual, sol.omega_sq, w0_sq,
            sol.omega_sq - w0_sq, shift_first, sol.omega - math.sqrt(w0_sq))


def _sweep(cfg: ScenarioConfig) -> ScenarioResult:
    geom, eps = cfg.geometry.build(), cfg.permittivities.build()
    n = cfg.numerics
    modes = [m.build() for m in cfg.modes]
    grid = n.a_over_L or [geom.a_over_L]
    ratios = n.ratios or [eps.ratio]
    items = [(m, geom, x, r, eps.eps_II) for m in modes for r in ratios for x in grid]
    sweep = Table(["mode", "a_over_L", "ratio", "kx_exact [1/length]", "kx_first_order [1/length]",
                   "kx_residual [1/length]", "omega_sq_exact [1/length^2]",
                   "omega_sq_unperturbed [1/length^2]", "delta_omega_sq_exact [1/length^2]",
                   "delta_omega_sq_first_order [1/length^2]", "delta_omega_exact [1/length]"],
                  _map(_sweep_point, items, n.workers))
    tables = {"sweep": sweep}
    summary = {"points": len(items)}
    if len(grid) >= 4 and math.log10(max(grid) / min(grid)) >= 1.5:
        fit = Table(["mode", "ratio", "fitted_order", "claimed_order"])
        for m in modes:
            if m.n_x < 1:
                continue
            for r in ratios:
                try:
                    slope = error_order_fit(m, geom, grid, PermittivityPair.from_ratio(r, eps.eps_II))
                except ResidualUnderflowError:
                    slope = math.nan
                fit.rows.append((m.label, r, slope, 3 if m.pol is Polarization.TE else 2))
        tables["sweep_fit"] = fit
    return ScenarioResult(cfg, tables, summary)


# --------------------------------------------------------------------------
# evolve


def _evolve(cfg: ScenarioConfig) -> ScenarioResult:
    geom = cfg.geometry.build()
    mode = cfg.modes[0].build()
    d, n = cfg.drive, cfg.numerics
    omega0 = base_omega(mode, geom, d.xi, d.eps_II, n.method)
    probe = d.build(d.omega_drive or resonance_frequency(omega0, d.delta))
    depth = modulation_depth(mode, geom, probe, n.method)

    if n.deltas is None:
        runs = [(None, probe)]
    else:
        runs = []
        for x in n.deltas:
            delta = x * depth
            runs.append((x, d.model_copy(update={"delta": delta}).build(resonance_frequency(omega0, delta))))

    evolve = Table(["delta_over_depth", "delta", "period", "t [length]", "N", "N_rwa", "norm_defect"])
    detuning = Table(["delta_over_depth", "delta", "max_N", "final_N"])
    summary = {"omega0": omega0, "modulation_depth": depth, "runs": []}
    for x, drive in runs:
        rate = squeezing_rate(mode, geom, drive)
        if n.periods is not None:
            duration = (n.periods + 0.5) * drive.period
        else:
            duration = 1.02 * math.asinh(math.sqrt(n.target_photons)) / rate
        res = evolve_bogoliubov(mode, geom, drive, duration, n.steps_per_period, n.method)
        rwa = res.rwa()
        defect = res.norm_defect
        for k in range(len(res.times)):
            evolve.rows.append((x if x is not None else math.nan, drive.delta, k, res.times[k],
                                res.n_t[k], rwa[k], defect[k]))
        run = {"delta": drive.delta, "omega_drive": drive.omega_drive, "rate": rate,
               "periods": len(res.times) - 1, "final_N": float(res.n_t[-1]),
               "wronskian_drift": res.wronskian_drift}
        if n.target_photons is not None and n.target_photons >= 100:
            run["fitted_rate"] = fitted_growth_rate(res, 10.0, n.target_photons)
        if n.step_check:
            fine = evolve_bogoliubov(mode, geom, drive, duration, 2 * n.steps_per_period, n.method)
            run["step_check_rel_change"] = float(abs(fine.n_t[-1] / res.n_t[-1] - 1.0))
            run["wronskian_drift"] = max(run["wronskian_drift"], fine.wronskian_drift)
        summary["runs"].append(run)
        if x is not None:
            detuning.rows.append((x, drive.delta, float(res.n_t.max()), float(res.n_t[-1])))
    tables = {"evolve": evolve}
    if n.deltas is not None:
        tables["detuning"] = detuning
    return ScenarioResult(cfg, tables, summary)


# --------------------------------------------------------------------------
# estimate


def _estimate(cfg: ScenarioConfig) -> ScenarioResult:
    e = cfg.estimate
    wavelength = e.wavelength_cm or wavelength_for_switching_time(e.switching_time_ps * 1e-12)
    est = estimate_physical(wavelength, e.chi_over_epsII, e.a_over_L, e.target_photons, eps_II=e.eps_II)
    data = asdict(est)
    warnings = list(data.pop("warnings"))
    units = {"wavelength_cm": "cm", "cavity_size_cm": "cm", "photon_frequency_GHz": "GHz",
             "drive_frequency_GHz": "GHz", "switching_time_ps": "ps", "k_par_sq_over_omega": "1/s",
             "squeezing_rate": "1/s", "target_photons": "1", "time_to_target": "s"}
    table = Table([f"{k} [{units[k]}]" for k in data], [tuple(data.values())])
    return ScenarioResult(cfg, {"estimate": table}, {"warnings": warnings})


_TASKS = {"spectrum": _spectrum, "sweep": _sweep, "evolve": _evolve, "estimate": _estimate}


def run_scenario(config: ScenarioConfig, out_dir=None) -> ScenarioResult:
    result = _TASKS[config.task](config)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result
