"""Shipped acceptance scenarios and their pass/fail checks.

Each criterion runs one scenario file from ``scenarios/`` and inspects the
resulting tables against an independent expectation where one exists.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .config import load_config
from .dynamics import WRONSKIAN_TOL
from .mode_solver import M_NOISE_FLOOR
from .runner import ScenarioResult, run_scenario


@dataclass
class Check:
    label: str
    passed: bool
    detail: str


@dataclass
class CriterionReport:
    number: int
    title: str
    scenario: str
    elapsed: float
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c for c in self.checks if not c.passed]
        detail = "; ".join(f"{c.label}: {c.detail}" for c in (failed or self.checks))
        return f"[{status}] criterion {self.number:2d} {self.title} ({self.elapsed:.2f} s) {detail}"


def scenario_dir() -> Path:
    return Path(str(resources.files("dce_cavity") / "scenarios"))


def scenario_path(number: int) -> Path:
    matches = sorted(scenario_dir().glob(f"ac{number:02d}_*.json"))
    if len(matches) != 1:
        raise FileNotFoundError(f"expected one scenario for criterion {number}, found {len(matches)}")
    return matches[0]


def _check(label, value, ok, bound) -> Check:
    return Check(label, bool(ok), f"{value:.3g} (need {bound})")


def _budget(report_elapsed: float, seconds: float) -> Check:
    return _check("runtime [s]", report_elapsed, report_elapsed < seconds, f"< {seconds:g}")


def _geometry(res: ScenarioResult):
    return res.config.geometry.build()


# --------------------------------------------------------------------------


def _c01(res: ScenarioResult, _):
    g = _geometry(res)
    eps = res.config.permittivities.eps_I
    t = res.tables["spectrum"]
    nx, ny, nz = (np.array(t.column(c)) for c in ("n_x", "n_y", "n_z"))
    formula = np.sqrt((nx * math.pi / g.L) ** 2 + (ny * math.pi / g.L_y) ** 2
                      + (nz * math.pi / g.L_z) ** 2) / math.sqrt(eps)
    omega = np.array(t.column("omega [1/length]"))
    err = float(np.max(np.abs(omega / formula - 1.0)))

    # standard rectangular-cavity counting: two polarizations when all
    # indices are non-zero, one when exactly one index vanishes
    count = len(omega)
    ref = []
    for a in range(8):
        for b in range(8):
            for c in range(8):
                zeros = (a == 0) + (b == 0) + (c == 0)
                if zeros <= 1:
                    w = math.sqrt((a * math.pi / g.L) ** 2 + (b * math.pi / g.L_y) ** 2
                                  + (c * math.pi / g.L_z) ** 2) / math.sqrt(eps)
                    ref += [w] * (2 if zeros == 0 else 1)
    ref = np.sort(ref)[:count]
    set_err = float(np.max(np.abs(np.sort(omega) / ref - 1.0)))
    return [_check("max rel error vs closed form", err, err < 1e-10, "< 1e-10"),
            _check("max rel error vs enumerated spectrum", set_err, set_err < 1e-10, "< 1e-10"),
            Check("mode count", count == 20, f"{count} (need 20)")]


def _c02(res: ScenarioResult, _):
    fit = res.tables["sweep_fit"]
    out = []
    for label, order, claimed in zip(fit.column("mode"), fit.column("fitted_order"),
                                     fit.column("claimed_order")):
        tol = 0.3 if claimed == 3 else 0.2
        out.append(_check(f"{label} slope", order, abs(order - claimed) <= tol, f"{claimed} +- {tol}"))
    return out


def _c03(res: ScenarioResult, _):
    t = res.tables["sweep"]
    exact = np.array(t.column("delta_omega_sq_exact [1/length^2]"))
    first = np.array(t.column("delta_omega_sq_first_order [1/length^2]"))
    out = []
    modes = t.column("mode")
    for label in dict.fromkeys(modes):
        sel = np.array([m == label for m in modes])
        dev = float(np.max(np.abs(exact[sel] / first[sel] - 1.0)))
        out.append(_check(f"{label} max |exact/formula - 1|", dev, dev <= 0.1, "<= 0.1"))
    return out


def _c04(res: ScenarioResult, _):
    s = res.summary
    ident, quad = s["gram_max_identity_deviation"], s["gram_max_quadrature_deviation"]
    n = int(math.isqrt(len(res.tables["gram"].rows)))
    return [_check("max |G - I|", ident, ident < 1e-8, "< 1e-8"),
            _check("max |G_closed - G_quadrature|", quad, quad < 1e-6, "< 1e-6"),
            Check("mode count", n == 10, f"{n} (need 10)")]


def _c05(res: ScenarioResult, _):
    t = res.tables["coupling"]
    vals = {}
    for x, ph, a, b, m in t.rows:
        vals[(x, ph, a, b)] = m
    anti = max(abs(m + vals[(x, ph, b, a)]) for (x, ph, a, b), m in vals.items())
    diag = max(abs(m) for (x, ph, a, b), m in vals.items() if a == b)
    grid = sorted({k[0] for k in vals}, reverse=True)
    big, small = grid[0], grid[-1]
    expected = big / small
    # TE-TE elements enter at third order in a/L and sit below the noise
    # floor here, so the linear scaling is asserted on TM-TM pairs only
    tm_ratios = [abs(vals[(big, ph, a, b)] / m) for (x, ph, a, b), m in vals.items()
                 if x == small and a != b and a.startswith("TM") and b.startswith("TM")
                 and abs(m) >= 1e3 * M_NOISE_FLOOR]
    out = [_check("max |M_ab + M_ba|", anti, anti < 1e-6, "< 1e-6"),
           _check("max |M_aa|", diag, diag < 1e-8, "< 1e-8")]
    if tm_ratios:
        worst = max(abs(r / expected - 1.0) for r in tm_ratios)
        out.append(_check(f"TM-TM scaling over a/L x{expected:g}, max rel dev", worst,
                          worst <= 0.2, "<= 0.2"))
    else:
        out.append(Check("TM-TM scaling", False, "no resolvable TM-TM elements"))
    return out


def _evolve_runs(results):
    for n, res in results.items():
        if res.config.task == "evolve":
            for run in res.summary["runs"]:
                yield n, run


def _c06(res: ScenarioResult, results):
    drift = max(run["wronskian_drift"] for _, run in _evolve_runs({**results, 6: res}))
    change = max(run["step_check_rel_change"] for run in res.summary["runs"])
    return [_check("max Wronskian drift over shipped evolutions", drift, drift <= WRONSKIAN_TOL,
                   f"<= {WRONSKIAN_TOL:g}"),
            _check("final N change on halving the step", change, change < 1e-3, "< 1e-3")]


def _c07(res: ScenarioResult, _):
    t = res.tables["evolve"]
    n = np.array(t.column("N"))
    rwa = np.array(t.column("N_rwa"))
    sel = (n >= 0.1) & (n <= 10.0)
    dev = float(np.max(np.abs(n[sel] / rwa[sel] - 1.0))) if sel.any() else math.inf
    run = res.summary["runs"][0]
    slope = run["fitted_rate"] / run["rate"]
    return [_check("max |N/sinh^2(rt) - 1| for N in [0.1, 10]", dev, dev <= 0.05, "<= 0.05"),
            Check("samples in window", int(sel.sum()) >= 3, f"{int(sel.sum())}"),
            _check("fitted slope / 2r", slope, abs(slope - 1.0) <= 0.05, "1 +- 0.05")]


def _c08(res: ScenarioResult, _):
    t = res.tables["detuning"]
    x = np.array(t.column("delta_over_depth"))
    max_n = np.array(t.column("max_N"))
    final_n = np.array(t.column("final_N"))
    order = np.argsort(x)
    x, max_n, final_n = x[order], max_n[order], final_n[order]
    resonant = float(final_n[x == 0][0])
    far = float(max_n[x >= 10].max())
    monotone = bool(np.all(np.diff(max_n) <= 0))
    return [_check("final N at delta = 0", resonant, resonant >= 1.0, ">= 1"),
            _check("max N for delta >= 10 x depth", far, far < 1e-2, "< 0.01"),
            Check("max N monotone in delta", monotone, ", ".join(f"{v:.3g}" for v in max_n))]


def _c09(res: ScenarioResult, _):
    t = res.tables["estimate"]
    rate = t.column("squeezing_rate [1/s]")[0]
    t_target = t.column("time_to_target [s]")[0]
    size = t.column("cavity_size_cm [cm]")[0]
    return [_check("|log10 r - 7|", abs(math.log10(rate) - 7), abs(math.log10(rate) - 7) <= 0.5, "<= 0.5"),
            _check("t(N=1000) [us]", t_target * 1e6, 0.3 <= t_target * 1e6 <= 30, "in [0.3, 30]"),
            _check("cavity size [cm]", size, 1 <= size < 100, "centimetre scale")]


def _c10(res: ScenarioResult, _):
    t = res.tables["sweep"]
    shifts = dict(zip(t.column("mode"), t.column("delta_omega_exact [1/length]")))
    te = next(abs(v) for k, v in shifts.items() if k.startswith("TE"))
    tm = next(abs(v) for k, v in shifts.items() if k.startswith("TM"))
    return [_check("|TE shift| / |TM shift|", te / tm, te <= 0.1 * tm, "<= 0.1")]


CRITERIA = {
    1: ("homogeneous-limit spectrum", _c01, 1.0),
    2: ("perturbative error orders", _c02, 30.0),
    3: ("eigenvalue-shift formula", _c03, 30.0),
    4: ("orthonormality", _c04, 60.0),
    5: ("coupling antisymmetry", _c05, 60.0),
    6: ("Bogoliubov conservation", _c06, 60.0),
    7: ("resonant growth", _c07, 60.0),
    8: ("detuning threshold", _c08, 600.0),
    9: ("physical estimate", _c09, 1.0),
    10: ("TE insensitivity", _c10, 30.0),
}


def verify(numbers=None, out_dir=None) -> list[CriterionReport]:
    numbers = sorted(numbers or CRITERIA)
    results, elapsed = {}, {}
    for n in numbers:
        config = load_config(scenario_path(n))
        start = time.perf_counter()
        target = None if out_dir is None else Path(out_dir) / config.name
        results[n] = run_scenario(config, target)
        elapsed[n] = time.perf_counter() - start
    reports = []
    for n in numbers:
        title, check, budget = CRITERIA[n]
        others = {k: v for k, v in results.items() if k != n}
        report = CriterionReport(n, title, results[n].config.name, elapsed[n])
        report.checks = check(results[n], others) + [_budget(elapsed[n], budget)]
        reports.append(report)
    return reports
