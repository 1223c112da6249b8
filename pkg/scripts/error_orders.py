"""Residual of the first-order axial wavenumbers against slab thickness.

    python3 scripts/error_orders.py --ratio 2 --points 8
"""

import argparse

import numpy as np

from dce_cavity.mode_solver import CavityGeometry, ModeIndex, PermittivityPair
from dce_cavity.perturbation import error_order_fit, order_residuals


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ratio", type=float, default=2.0, help="eps_II / eps_I")
    p.add_argument("--points", type=int, default=6)
    p.add_argument("--lo", type=float, default=3e-4)
    p.add_argument("--hi", type=float, default=3e-2)
    args = p.parse_args()

    base = CavityGeometry(1.0, 1.0, 1.0, 0.01)
    eps = PermittivityPair.from_ratio(args.ratio)
    grid = np.geomspace(args.lo, args.hi, args.points)
    modes = [ModeIndex(1, 1, 1, "TE"), ModeIndex(2, 1, 1, "TE"),
             ModeIndex(1, 1, 1, "TM"), ModeIndex(2, 1, 1, "TM")]
    print("a/L        " + "  ".join(f"{m.label:>11s}" for m in modes))
    table = np.array([order_residuals(m, base, grid, eps) for m in modes]).T
    for x, row in zip(grid, table):
        print(f"{x:9.3e}  " + "  ".join(f"{v:11.3e}" for v in row))
    print("slope      " + "  ".join(f"{error_order_fit(m, base, grid, eps):11.3f}" for m in modes))


if __name__ == "__main__":
    main()
