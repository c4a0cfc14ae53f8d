"""Synthetic experiment generators.

Shadowed (or spot-lit) images are built by pointwise multiplication of a
clean image with an attenuation field that equals ``c`` inside a region
and 1 outside; blurring the field with a Gaussian produces a penumbra
("soft" case).  ``c`` below 1 darkens (shadow), above 1 brightens (spot
light).  Alongside the corrupted image, a mask band straddling the region
boundary is produced at a configurable width; the band is where transport
is suppressed during removal.

``edge_mask`` provides a deterministic single-parameter edge detector for
compact-representation experiments: pixels whose central-difference
gradient magnitude exceeds a fraction of the image's full range.  For a
clean intensity step this already marks both pixels flanking the step, so
every crossing edge has its two endpoints covered; an optional extra
dilation widens the band further.  Externally computed masks (e.g. Canny)
can always be supplied instead through the mask file interface.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import GridSpec, Image, Mask

_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass(frozen=True)
class ShadowSpec:
    """Region + attenuation defining a synthetic shadow or light spot.

    ``region`` is either a half-open rectangle (row0, col0, row1, col1)
    or a boolean pixel set of the grid's shape.  ``factor`` is the
    attenuation c (0 < c < 1 shadows, c > 1 lights); ``sigma`` blurs the
    attenuation field; ``mask_width`` is the even width of the generated
    boundary band.
    """

    region: tuple[int, int, int, int] | np.ndarray
    factor: float
    sigma: float = 0.0
    mask_width: int = 2

    def __post_init__(self):
        if not self.factor > 0:
            raise ValueError(f"attenuation factor must be positive, got {self.factor}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.mask_width < 2 or self.mask_width % 2 != 0:
            raise ValueError(f"mask width must be even and >= 2, got {self.mask_width}")

    def region_pixels(self, grid: GridSpec) -> np.ndarray:
        if isinstance(self.region, np.ndarray):
            reg = self.region.astype(bool)
            if reg.shape != (grid.rows, grid.cols):
                raise ValueError(
                    f"region shape {reg.shape} does not match grid "
                    f"{grid.rows}x{grid.cols}"
                )
            return reg
        r0, c0, r1, c1 = self.region
        if not (0 <= r0 < r1 <= grid.rows and 0 <= c0 < c1 <= grid.cols):
            raise ValueError(
                f"rectangle {self.region} exceeds grid {grid.rows}x{grid.cols}"
            )
        reg = np.zeros((grid.rows, grid.cols), dtype=bool)
        reg[r0:r1, c0:c1] = True
        return reg


def shadow_spec_from_json(source) -> ShadowSpec:
    """Build a spec from a JSON file path, JSON string, or mapping."""
    if isinstance(source, dict):
        payload = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            payload = json.loads(text)
        else:
            with open(text, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
    return ShadowSpec(
        region=tuple(payload["region"]),
        factor=float(payload["factor"]),
        sigma=float(payload.get("sigma", 0.0)),
        mask_width=int(payload.get("mask_width", 2)),
    )


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _gaussian_blur2d(arr: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 0.0:
        return arr.copy()
    k = _gaussian_kernel(sigma)
    # 'reflect' is symmetric half-sample padding, the mirror convention;
    # with a normalised symmetric kernel it preserves total mass exactly.
    out = ndimage.correlate1d(arr, k, axis=0, mode="reflect")
    return ndimage.correlate1d(out, k, axis=1, mode="reflect")


def gaussian_convolve(img: Image, sigma: float) -> Image:
    """Separable Gaussian blur, kernel truncated at radius ceil(3 sigma)."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    return img.with_values(_gaussian_blur2d(img.as_grid(), sigma))


def boundary_band(region: np.ndarray, width: int) -> np.ndarray:
    """Pixels straddling the region boundary, dilated to the given width."""
    inner = region & ~ndimage.binary_erosion(region, _CROSS, border_value=1)
    outer = ~region & ndimage.binary_dilation(region, _CROSS)
    band = inner | outer
    extra = (width - 2) // 2
    if extra > 0:
        band = ndimage.binary_dilation(band, _CROSS, iterations=extra)
    return band


def make_shadowed(f_star: Image, spec: ShadowSpec) -> tuple[Image, Mask]:
    """Corrupt a clean image per the spec; also return the boundary mask."""
    if np.any(f_star.values <= 0):
        raise ValueError("clean image must be strictly positive")
    region = spec.region_pixels(f_star.grid)
    s = np.where(region, spec.factor, 1.0)
    if spec.sigma > 0:
        s = _gaussian_blur2d(s, spec.sigma)
    corrupted = f_star.with_values(f_star.as_grid() * s)
    band = boundary_band(region, spec.mask_width)
    return corrupted, Mask(f_star.grid, band.reshape(-1))


def edge_mask(v: Image, threshold: float, dilate: int = 0) -> Mask:
    """Mark pixels whose normalised gradient magnitude exceeds `threshold`.

    The gradient is the central difference (mirrored at the boundary) and
    the threshold is relative to the image's full range; a step between
    two constant plateaus marks the two flanking pixel columns, giving
    every crossing edge two masked endpoints.  ``dilate`` adds that many
    rounds of 4-neighbour dilation for wider support.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    v2 = v.as_grid()
    h = v.grid.h
    span = float(v2.max() - v2.min())
    if span == 0.0:
        return Mask.empty(v.grid)
    padded = np.pad(v2, 1, mode="edge")
    gx = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / (2.0 * h)
    gy = (padded[1:-1, 2:] - padded[1:-1, :-2]) / (2.0 * h)
    marked = np.sqrt(gx * gx + gy * gy) > threshold * span
    if dilate > 0:
        marked = ndimage.binary_dilation(marked, _CROSS, iterations=dilate)
    return Mask(v.grid, marked.reshape(-1))


def random_texture(
    rows: int,
    cols: int,
    rng: np.random.Generator,
    smoothness: float = 3.0,
    low: float = 60.0,
    high: float = 200.0,
) -> Image:
    """Smooth positive random texture, rescaled into [low, high]."""
    if not 0 < low < high:
        raise ValueError(f"need 0 < low < high, got {low}, {high}")
    noise = rng.uniform(0.0, 1.0, size=(rows, cols))
    smooth = _gaussian_blur2d(noise, smoothness) if smoothness > 0 else noise
    lo, hi = smooth.min(), smooth.max()
    unit = (smooth - lo) / (hi - lo) if hi > lo else np.zeros_like(smooth)
    return Image.from_grid(low + (high - low) * unit)
