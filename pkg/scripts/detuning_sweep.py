"""Peak photon number over a fixed number of periods against detuning.

    python3 scripts/detuning_sweep.py --chi 0.3 --a 0.05 --periods 200
"""

import argparse

import numpy as np

from dce_cavity.dynamics import detuning_sweep
from dce_cavity.mode_solver import CavityGeometry, ModeIndex


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--chi", type=float, default=0.3)
    p.add_argument("--a", type=float, default=0.05, help="a/L in a unit cube")
    p.add_argument("--periods", type=int, default=200)
    p.add_argument("--method", choices=["first_order", "exact"], default="first_order")
    args = p.parse_args()

    mode = ModeIndex(1, 1, 1, "TM")
    geom = CavityGeometry(1.0, 1.0, 1.0, args.a)
    xs = np.concatenate([[0.0], np.geomspace(0.1, 30, 19)])
    pts = detuning_sweep(mode, geom, 1.0, args.chi, 1.0, xs, args.periods, method=args.method)
    print(f"{'delta/depth':>12s} {'delta':>11s} {'max N':>11s} {'final N':>11s}")
    for pt in pts:
        print(f"{pt.delta_over_depth:12.3f} {pt.delta:11.3e} {pt.max_n:11.3e} {pt.final_n:11.3e}")


if __name__ == "__main__":
    main()
