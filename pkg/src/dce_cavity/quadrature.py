"""Brute-force 3D quadrature of mode overlaps.

Independent of the closed-form integrals in :mod:`mode_solver`: fields are
sampled pointwise on a tensor grid.  In x, Gauss-Legendre nodes are placed
separately in each region (the fields have a kink at the interface); in y
and z the midpoint rule is exact for the trigonometric products involved.
"""

from __future__ import annotations

import numpy as np

from .mode_solver import ModeFunction


def _gauss(lo: float, hi: float, n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _midpoint(length: float, n: int):
    h = length / n
    return (np.arange(n) + 0.5) * h, np.full(n, h)


def tensor_grid(geom, points: int = 64):
    slab = max(8, points // 4)
    x1, w1 = _gauss(0.0, geom.a, slab)
    x2, w2 = _gauss(geom.a, geom.L, points - slab)
    x, wx = np.concatenate([x1, x2]), np.concatenate([w1, w2])
    y, wy = _midpoint(geom.L_y, points)
    z, wz = _midpoint(geom.L_z, points)
    X, Y, Z = np.meshgrid(x, y, z, indexing="ij")
    W = wx[:, None, None] * wy[None, :, None] * wz[None, None, :]
    return X, Y, Z, W


def quadrature_gram(functions: list[ModeFunction], points: int = 64) -> np.ndarray:
    geom = functions[0].geom
    X, Y, Z, W = tensor_grid(geom, points)
    fields = [f(X, Y, Z) for f in functions]
    n = len(fields)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = float(np.sum(W * np.sum(fields[i] * fields[j], axis=0)))
    return g
