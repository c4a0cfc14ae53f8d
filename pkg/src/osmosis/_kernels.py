"""Compiled inner loops.

Only the lexicographic relaxation sweep lives here: it has a sequential
dependency along the sweep order, so it cannot be vectorised without
changing the iteration (and hence the results), and a fixed row-major
order is required for reproducibility.
"""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def sor_sweep(mdiag, mnorth, msouth, meast, mwest, b, x, omega, rows, cols):
    """One in-place SOR sweep over the pentadiagonal system M x = b.

    ``mdiag`` is the diagonal of M and ``m*`` its off-diagonals, laid out
    like the stencil operator (north = column k+cols, east = k+1, ...).
    Sweep order is row-major, pixel 0 first.
    """
    k = 0
    for i in range(rows):
        for j in range(cols):
            acc = b[k]
            if i > 0:
                acc -= msouth[k] * x[k - cols]
            if i < rows - 1:
                acc -= mnorth[k] * x[k + cols]
            if j > 0:
                acc -= mwest[k] * x[k - 1]
            if j < cols - 1:
                acc -= meast[k] * x[k + 1]
            x[k] = (1.0 - omega) * x[k] + omega * acc / mdiag[k]
            k += 1


def warm_up():
    """Trigger JIT compilation on a tiny system (cached afterwards)."""
    z = np.zeros(4)
    sor_sweep(np.ones(4), z, z, z, z, np.ones(4), np.ones(4), 1.0, 2, 2)
