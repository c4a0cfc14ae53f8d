"""Metrics and diagnostic oracles.

* ``energy``: discrete quadrature of the variational energy
  sum of v**(1-p) / (2-p) * |grad(u/v)|**(2-p) * h**2 with forward
  differences and mirrored boundary.  It vanishes exactly when u is a
  positive multiple of v, which is how steady states are recognised.
* ``ssim``: windowed structural similarity with a uniform 8x8 window,
  stride 1, and the conventional stabilisation constants for a declared
  dynamic range.  Absolute values depend on the windowing convention, so
  it is fixed here and documented rather than configurable per call.
* ``dense_spectrum``: densifies the one-step update matrix on tiny grids
  and reports its spectrum; the theory predicts a simple unit eigenvalue
  with positive eigenvector parallel to the reference, everything else
  strictly inside the unit disk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grid import Image
from .operator import StencilOperator, to_dense

#: Conventional SSIM stabilisation coefficients.
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03

#: Largest pixel count for which the update matrix may be densified.
DENSE_GUARD = 64


def mean_value(img: Image) -> float:
    return img.mean


def mass(img: Image) -> float:
    return img.total


def mse(a: Image, b: Image) -> float:
    if a.grid != b.grid:
        raise ValueError("images live on different grids")
    return float(np.mean((a.values - b.values) ** 2))


def energy(u: Image, v: Image, p: float = 1.0) -> float:
    """Variational energy of the state relative to the reference."""
    if not (1.0 <= p < 2.0):
        raise ValueError(f"p must be in [1, 2), got {p}")
    if u.grid != v.grid:
        raise ValueError("images live on different grids")
    if np.any(v.values <= 0):
        raise ValueError("reference image must be strictly positive")
    h = u.grid.h
    w = u.as_grid() / v.as_grid()
    # Forward differences; the mirrored neighbour beyond the last row or
    # column equals the pixel itself, so those differences are zero.
    gx = np.zeros_like(w)
    gy = np.zeros_like(w)
    gx[:-1, :] = (w[1:, :] - w[:-1, :]) / h
    gy[:, :-1] = (w[:, 1:] - w[:, :-1]) / h
    grad_mag = np.sqrt(gx * gx + gy * gy)
    weight = v.as_grid() ** (1.0 - p) / (2.0 - p)
    return float(np.sum(weight * grad_mag ** (2.0 - p)) * h * h)


def _box_sums(arr: np.ndarray, win: int) -> np.ndarray:
    """Sums over all win x win windows (valid placement), via integral image."""
    c = np.cumsum(np.cumsum(arr, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    return c[win:, win:] - c[:-win, win:] - c[win:, :-win] + c[:-win, :-win]


def ssim(a: Image, b: Image, data_range: float, window: int = 8) -> float:
    """Mean structural similarity over all uniform `window` placements.

    ``data_range`` is the nominal dynamic range of the inputs (255 for
    8-bit data).  Images smaller than the window are compared with a
    single window covering everything.
    """
    if a.grid != b.grid:
        raise ValueError("images live on different grids")
    if not data_range > 0:
        raise ValueError(f"data_range must be positive, got {data_range}")
    x = a.as_grid()
    y = b.as_grid()
    win = min(window, x.shape[0], x.shape[1])
    n = win * win
    c1 = (_SSIM_K1 * data_range) ** 2
    c2 = (_SSIM_K2 * data_range) ** 2

    mx = _box_sums(x, win) / n
    my = _box_sums(y, win) / n
    sxx = _box_sums(x * x, win) / n - mx * mx
    syy = _box_sums(y * y, win) / n - my * my
    sxy = _box_sums(x * y, win) / n - mx * my

    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class SpectrumReport:
    scheme: str
    tau: float
    eigenvalues: np.ndarray
    n_unit: int
    subunit_max: float
    unit_vector: np.ndarray
    unit_vector_positive: bool
    cosine_with_reference: float | None
    p_nonnegative: bool

    @property
    def stable(self) -> bool:
        return self.p_nonnegative and self.n_unit == 1 and self.subunit_max < 1.0

    def as_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "tau": self.tau,
            "n_unit": self.n_unit,
            "subunit_max": self.subunit_max,
            "unit_vector_positive": self.unit_vector_positive,
            "cosine_with_reference": self.cosine_with_reference,
            "p_nonnegative": self.p_nonnegative,
            "stable": self.stable,
            "max_abs_eigenvalue": float(np.max(np.abs(self.eigenvalues))),
        }


def dense_update_matrix(op: StencilOperator, tau: float, scheme: str) -> np.ndarray:
    """The one-step update matrix P, densified."""
    n = op.grid.n_pixels
    if n > DENSE_GUARD:
        raise ValueError(f"dense analysis limited to {DENSE_GUARD} pixels, got {n}")
    a = to_dense(op)
    eye = np.eye(n)
    if scheme == "explicit":
        return eye + tau * a
    if scheme == "semi-implicit":
        return np.linalg.inv(eye - tau * a)
    raise ValueError(f"unknown scheme {scheme!r}")


def dense_spectrum(
    op: StencilOperator,
    tau: float,
    scheme: str,
    v: Image | None = None,
    unit_tol: float = 1e-10,
) -> SpectrumReport:
    """Full eigen-analysis of the update matrix on a tiny grid."""
    p = dense_update_matrix(op, tau, scheme)
    eigvals, eigvecs = np.linalg.eig(p)
    is_unit = np.abs(eigvals - 1.0) <= unit_tol
    n_unit = int(np.count_nonzero(is_unit))
    others = np.abs(eigvals[~is_unit])
    subunit_max = float(others.max()) if others.size else 0.0

    if n_unit >= 1:
        k = int(np.argmin(np.abs(eigvals - 1.0)))
    else:
        k = int(np.argmax(np.abs(eigvals)))
    vec = np.real(eigvecs[:, k])
    # Orient so the dominant component is positive.
    vec = vec * np.sign(vec[np.argmax(np.abs(vec))])
    vec_norm = vec / np.linalg.norm(vec)
    positive = bool(np.all(vec_norm > 0))

    cosine = None
    if v is not None:
        vv = v.values / np.linalg.norm(v.values)
        cosine = float(abs(np.dot(vec_norm, vv)))

    return SpectrumReport(
        scheme=scheme,
        tau=tau,
        eigenvalues=eigvals,
        n_unit=n_unit,
        subunit_max=subunit_max,
        unit_vector=vec_norm,
        unit_vector_positive=positive,
        cosine_with_reference=cosine,
        p_nonnegative=bool(p.min() >= -1e-14 * max(1.0, abs(p).max())),
    )


@dataclass(frozen=True)
class MetricReport:
    mean: float
    mass: float
    min: float
    max: float
    ssim: float | None = None
    energy: float | None = None

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "mass": self.mass,
            "min": self.min,
            "max": self.max,
            "ssim": self.ssim,
            "energy": self.energy,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def metric_report(
    img: Image,
    reference: Image | None = None,
    data_range: float | None = None,
    v: Image | None = None,
    p: float = 1.0,
) -> MetricReport:
    """Summary metrics of an image, optionally against a reference."""
    s = None
    if reference is not None:
        if data_range is None:
            lo = min(img.values.min(), reference.values.min())
            hi = max(img.values.max(), reference.values.max())
            data_range = float(hi - lo) or 1.0
        s = ssim(img, reference, data_range)
    e = energy(img, v, p) if v is not None else None
    return MetricReport(
        mean=img.mean,
        mass=img.total,
        min=float(img.values.min()),
        max=float(img.values.max()),
        ssim=s,
        energy=e,
    )
