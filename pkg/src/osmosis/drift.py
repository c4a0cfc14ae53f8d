"""Edge-located drift fields computed from a reference image.

The drift lives on the four edges of each pixel.  The component stored at
pixel (i, j) for direction N is

    dN[i, j] = 2 (v[i+1, j] - v[i, j]) / (h (v[i+1, j] + v[i, j]))

and analogously for S, E, W.  Both pixels sharing an interior edge store
the same edge, so dN at (i, j) is exactly the negative of dS at (i+1, j)
(bit-level: the formula is antisymmetric under swapping the two pixels).
Boundary edges carry zero drift.

Masked variants:

* ``shadow_drift`` zeroes every edge incident to at least one pixel of the
  suppressed region, leaving pure (nonlinear) diffusion there.
* ``cdr_drift`` is the complement: drift is kept only on edges whose BOTH
  endpoints lie in the retained region, which is how an image is encoded
  by the intensity ratios across its edge set alone.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .grid import DIRECTIONS, GridSpec, Image, Mask

_DIR_INDEX = {d: k for k, d in enumerate(DIRECTIONS)}

_STEPS = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}


@dataclass(frozen=True)
class DriftField:
    """Directional drift components per pixel, plus per-edge zero flags.

    ``components[k]`` holds the direction ``DIRECTIONS[k]``; flattened
    row-major like every other field.  ``suppressed`` marks edges whose
    drift was forced to zero (boundary edges and mask-suppressed ones).
    """

    grid: GridSpec
    components: np.ndarray = field(repr=False)
    suppressed: np.ndarray = field(repr=False)

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=np.float64)
        supp = np.asarray(self.suppressed, dtype=bool)
        n = self.grid.n_pixels
        if comp.shape != (4, n) or supp.shape != (4, n):
            raise ValueError(f"drift arrays must have shape (4, {n})")
        comp = comp.copy()
        supp = supp.copy()
        comp.setflags(write=False)
        supp.setflags(write=False)
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "suppressed", supp)

    def component(self, direction: str) -> np.ndarray:
        return self.components[_DIR_INDEX[direction]]

    @property
    def dN(self) -> np.ndarray:
        return self.components[0]

    @property
    def dS(self) -> np.ndarray:
        return self.components[1]

    @property
    def dE(self) -> np.ndarray:
        return self.components[2]

    @property
    def dW(self) -> np.ndarray:
        return self.components[3]


def _edge_component(v2: np.ndarray, h: float, di: int, dj: int) -> tuple[np.ndarray, np.ndarray]:
    """Drift toward the (di, dj) neighbour; zero + suppressed at the boundary."""
    rows, cols = v2.shape
    d = np.zeros((rows, cols))
    supp = np.ones((rows, cols), dtype=bool)
    src = (slice(max(0, -di), rows - max(0, di)), slice(max(0, -dj), cols - max(0, dj)))
    dst = (slice(max(0, di), rows - max(0, -di)), slice(max(0, dj), cols - max(0, -dj)))
    vp, vq = v2[src], v2[dst]
    d[src] = 2.0 * (vq - vp) / (h * (vq + vp))
    supp[src] = False
    return d, supp


def canonical_drift(v: Image) -> DriftField:
    """Drift of the log of the reference image, discretised edge-wise.

    Makes `v` (up to a multiplicative constant) the steady state of the
    evolution.  Requires a strictly positive reference.
    """
    if np.any(v.values <= 0):
        raise ValueError("reference image must be strictly positive")
    v2 = v.as_grid()
    h = v.grid.h
    comps = np.empty((4, v.grid.n_pixels))
    supps = np.empty((4, v.grid.n_pixels), dtype=bool)
    for k, direction in enumerate(DIRECTIONS):
        di, dj = _STEPS[direction]
        d, supp = _edge_component(v2, h, di, dj)
        comps[k] = d.reshape(-1)
        supps[k] = supp.reshape(-1)
    return DriftField(v.grid, comps, supps)


def _mask_edges(base: DriftField, mask: Mask, keep_rule: str) -> DriftField:
    m2 = mask.as_grid()
    rows, cols = m2.shape
    comps = np.array(base.components)
    supps = np.array(base.suppressed)
    for k, direction in enumerate(DIRECTIONS):
        di, dj = _STEPS[direction]
        src = (slice(max(0, -di), rows - max(0, di)), slice(max(0, -dj), cols - max(0, dj)))
        dst = (slice(max(0, di), rows - max(0, -di)), slice(max(0, dj), cols - max(0, -dj)))
        if keep_rule == "outside":
            kill = m2[src] | m2[dst]
        else:  # keep only edges internal to the masked set
            kill = ~(m2[src] & m2[dst])
        comp2 = comps[k].reshape(rows, cols)
        supp2 = supps[k].reshape(rows, cols)
        comp2[src][kill] = 0.0
        supp2[src][kill] = True
    return DriftField(base.grid, comps, supps)


def shadow_drift(v: Image, mask: Mask) -> DriftField:
    """Canonical drift with every edge touching the masked band zeroed.

    An edge is suppressed as soon as EITHER endpoint lies in the band, so
    no intensity jump across the band boundary leaks into the transport
    term; diffusion alone acts there.
    """
    if mask.grid != v.grid:
        raise ValueError("mask and reference image live on different grids")
    return _mask_edges(canonical_drift(v), mask, keep_rule="outside")


def cdr_drift(v: Image, edge_mask: Mask) -> DriftField:
    """Drift retained only on edges whose both endpoints are masked.

    Complementary to ``shadow_drift``: for the same mask an interior edge
    is nonzero in at most one of the two fields.
    """
    if edge_mask.grid != v.grid:
        raise ValueError("mask and reference image live on different grids")
    return _mask_edges(canonical_drift(v), edge_mask, keep_rule="inside")


# Debug dump layout: 16-byte header (rows, cols as little-endian uint64),
# then the four component grids (N, S, E, W) as little-endian float64,
# row-major.

def write_drift_dump(field: DriftField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(struct.pack("<QQ", field.grid.rows, field.grid.cols))
        for k in range(4):
            fh.write(field.components[k].astype("<f8").tobytes())


def read_drift_dump(path) -> tuple[int, int, np.ndarray]:
    """Returns (rows, cols, components) with components shaped (4, rows*cols)."""
    with open(path, "rb") as fh:
        rows, cols = struct.unpack("<QQ", fh.read(16))
        n = rows * cols
        comps = np.frombuffer(fh.read(4 * n * 8), dtype="<f8").reshape(4, n)
    return rows, cols, comps.astype(np.float64)
