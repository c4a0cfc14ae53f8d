"""Pixel-grid geometry, positive-image container and mask container.

All state vectors are stored flattened in row-major order: pixel (i, j)
lives at flat index ``i * cols + j``.  Every module in the package shares
this convention, which keeps the five diagonals of the stencil operator at
fixed offsets (0, +-1, +-cols).

Direction labels follow the stencil convention used throughout: "N"/"S"
step along the row axis (i+1 / i-1) and "E"/"W" along the column axis
(j+1 / j-1).  At the image boundary the missing neighbour is obtained by
mirroring, i.e. it maps back onto the pixel itself, and the edge is
flagged as a boundary edge so that transport is switched off there
(homogeneous Neumann condition).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

DIRECTIONS = ("N", "S", "E", "W")

_DIR_STEPS = {"N": (1, 0), "S": (-1, 0), "E": (0, 1), "W": (0, -1)}

#: Default positivity floor for 8-bit data (one grey level).
DEFAULT_FLOOR = 1.0 / 255.0


@dataclass(frozen=True)
class GridSpec:
    """Regular pixel grid: `rows` x `cols` pixels with spacing `h`."""

    rows: int
    cols: int
    h: float = 1.0

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.rows}x{self.cols}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")

    @property
    def n_pixels(self) -> int:
        return self.rows * self.cols

    def flat_index(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise ValueError(f"pixel ({i}, {j}) outside {self.rows}x{self.cols} grid")
        return i * self.cols + j

    def pixel_coords(self, k: int) -> tuple[int, int]:
        if not (0 <= k < self.n_pixels):
            raise ValueError(f"flat index {k} outside grid of {self.n_pixels} pixels")
        return divmod(k, self.cols)

    def neighbor(self, k: int, direction: str) -> tuple[int, bool]:
        """Neighbour of flat pixel `k` in `direction`.

        Returns ``(index, is_boundary)``.  Off-grid neighbours mirror back
        to `k` itself and are flagged as boundary edges.
        """
        i, j = self.pixel_coords(k)
        try:
            di, dj = _DIR_STEPS[direction]
        except KeyError:
            raise ValueError(f"unknown direction {direction!r}, expected one of {DIRECTIONS}")
        ni, nj = i + di, j + dj
        if 0 <= ni < self.rows and 0 <= nj < self.cols:
            return ni * self.cols + nj, False
        return k, True


def _check_values(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape == (grid.rows, grid.cols):
        arr = arr.reshape(-1)
    if arr.shape != (grid.n_pixels,):
        raise ValueError(
            f"values shape {arr.shape} does not match grid "
            f"{grid.rows}x{grid.cols} (N={grid.n_pixels})"
        )
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Image:
    """Scalar field on a grid, flattened row-major.

    Immutable after construction; the evolution loop replaces whole images
    rather than mutating in place, so instances are safe to share.
    """

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values))

    @classmethod
    def from_grid(cls, array2d, h: float = 1.0) -> "Image":
        arr = np.asarray(array2d, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        return cls(GridSpec(arr.shape[0], arr.shape[1], h), arr)

    def as_grid(self) -> np.ndarray:
        """Read-only 2-D view of the values."""
        return self.values.reshape(self.grid.rows, self.grid.cols)

    def with_values(self, values: np.ndarray) -> "Image":
        return Image(self.grid, values)

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def total(self) -> float:
        return float(self.values.sum())


@dataclass(frozen=True)
class Mask:
    """Boolean field marking the drift-suppressed region of the domain."""

    grid: GridSpec
    in_omega_b: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.in_omega_b)
        if arr.shape == (self.grid.rows, self.grid.cols):
            arr = arr.reshape(-1)
        if arr.shape != (self.grid.n_pixels,):
            raise ValueError(
                f"mask shape {arr.shape} does not match grid "
                f"{self.grid.rows}x{self.grid.cols}"
            )
        arr = arr.astype(bool).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "in_omega_b", arr)

    @classmethod
    def from_grid(cls, array2d, h: float = 1.0) -> "Mask":
        arr = np.asarray(array2d)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        return cls(GridSpec(arr.shape[0], arr.shape[1], h), arr)

    def as_grid(self) -> np.ndarray:
        return self.in_omega_b.reshape(self.grid.rows, self.grid.cols)

    @classmethod
    def empty(cls, grid: GridSpec) -> "Mask":
        return cls(grid, np.zeros(grid.n_pixels, dtype=bool))

    @classmethod
    def full(cls, grid: GridSpec) -> "Mask":
        return cls(grid, np.ones(grid.n_pixels, dtype=bool))


def validate_positive(img: Image, floor: float = DEFAULT_FLOOR) -> tuple[Image, int]:
    """Raise every value below `floor` up to `floor`.

    Returns the corrected image together with the number of lifted pixels.
    Non-finite values are a data error: they cannot be repaired by a floor.
    """
    if not floor > 0:
        raise ValueError(f"floor must be positive, got {floor}")
    vals = img.values
    if not np.all(np.isfinite(vals)):
        bad = int(np.count_nonzero(~np.isfinite(vals)))
        raise DataError(f"image contains {bad} non-finite values")
    lifted = int(np.count_nonzero(vals < floor))
    if lifted == 0:
        return img, 0
    return img.with_values(np.maximum(vals, floor)), lifted
