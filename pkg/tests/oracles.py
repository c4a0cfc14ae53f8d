"""Brute-force reference implementations used as independent oracles.

Everything here is written with plain per-pixel loops and scalar
arithmetic, straight from the stencil definitions, deliberately sharing
no code with the package internals.
"""

from __future__ import annotations

import numpy as np

# Direction steps: N/S along rows, E/W along columns.
STEPS = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}


def mirror(i, j, rows, cols):
    """Clamp out-of-range coordinates back onto the grid (mirror)."""
    return min(max(i, 0), rows - 1), min(max(j, 0), cols - 1)


def pointwise_g_loops(u2, v2, h, eps, p, mode="nonlinear"):
    rows, cols = u2.shape
    g = np.ones((rows, cols))
    if mode == "linear":
        return g
    for i in range(rows):
        for j in range(cols):
            in_, jn = mirror(i + 1, j, rows, cols)
            is_, js = mirror(i - 1, j, rows, cols)
            ie, je = mirror(i, j + 1, rows, cols)
            iw, jw = mirror(i, j - 1, rows, cols)
            ratio = u2[i, j] / v2[i, j]
            sx = (u2[in_, jn] - u2[is_, js]) / (2 * h) - (v2[in_, jn] - v2[is_, js]) / (2 * h) * ratio
            sy = (u2[ie, je] - u2[iw, jw]) / (2 * h) - (v2[ie, je] - v2[iw, jw]) / (2 * h) * ratio
            g[i, j] = (sx * sx + sy * sy + eps) ** (-p / 2.0)
    return g


def edge_kept(i, j, ni, nj, mask2, variant):
    """Whether the drift on edge (i,j)-(ni,nj) survives the masking rule."""
    if variant == "canonical" or mask2 is None:
        return True
    if variant == "shadow":
        return not (mask2[i, j] or mask2[ni, nj])
    if variant == "cdr":
        return mask2[i, j] and mask2[ni, nj]
    raise ValueError(variant)


def dense_operator(u2, v2, h, eps, p, mode="nonlinear", variant="canonical", mask2=None):
    """Dense A with entries filled one by one from the stencil formulas."""
    rows, cols = u2.shape
    n = rows * cols
    g = pointwise_g_loops(u2, v2, h, eps, p, mode)
    a = np.zeros((n, n))
    for i in range(rows):
        for j in range(cols):
            k = i * cols + j
            for di, dj in STEPS.values():
                ni, nj = i + di, j + dj
                if not (0 <= ni < rows and 0 <= nj < cols):
                    continue  # mirrored edge: zero gradient and zero drift
                q = ni * cols + nj
                ge = (g[ni, nj] + g[i, j]) / 2.0
                if edge_kept(i, j, ni, nj, mask2, variant):
                    d = 2.0 * (v2[ni, nj] - v2[i, j]) / (h * (v2[ni, nj] + v2[i, j]))
                else:
                    d = 0.0
                beta = h * d / 2.0
                a[k, q] += ge / h**2 * (1.0 - beta)
                a[k, k] += ge / h**2 * (-1.0 - beta)
    return a


def dense_solve(a_dense, tau, b):
    n = a_dense.shape[0]
    return np.linalg.solve(np.eye(n) - tau * a_dense, b)


def random_positive(rng, rows, cols, lo=0.5, hi=2.0):
    return rng.uniform(lo, hi, size=(rows, cols))
