"""Image file input/output: 8/16-bit PNG and binary PGM/PPM.

Images are exchanged with the rest of the package as lists of 2-D float64
channel arrays holding the raw sample values (0..maxval), plus the format
maxval (255 or 65535).  Masks are single-channel images where the value 0
marks the suppressed region and anything nonzero the rest.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .errors import DataError
from .grid import Image, Mask

_PNM_MAGIC = re.compile(rb"^P[56]")


def load_channels(path) -> tuple[list[np.ndarray], int]:
    """Read an image file; returns (channels, maxval)."""
    path = Path(path)
    data = path.read_bytes()
    if _PNM_MAGIC.match(data):
        return _load_pnm(data, path)
    return _load_png(path)


def _load_png(path: Path) -> tuple[list[np.ndarray], int]:
    with PILImage.open(path) as im:
        if im.mode in ("RGBA", "LA", "P"):
            im = im.convert("RGB" if im.mode in ("RGBA", "P") else "L")
        if im.mode in ("I", "I;16"):
            arr = np.asarray(im, dtype=np.float64)
            return [arr], 65535
        if im.mode == "L":
            return [np.asarray(im, dtype=np.float64)], 255
        if im.mode == "RGB":
            arr = np.asarray(im, dtype=np.float64)
            return [arr[:, :, k].copy() for k in range(3)], 255
        raise DataError(f"unsupported image mode {im.mode!r} in {path}")


def _load_pnm(data: bytes, path: Path) -> tuple[list[np.ndarray], int]:
    # Binary PGM (P5) / PPM (P6): ASCII header tokens then raw samples.
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        m = re.match(rb"(?:\s+|\s*#[^\n]*\n)*([0-9]+)", data[pos:])
        if not m:
            raise DataError(f"malformed PNM header in {path}")
        tokens.append(m.group(1))
        pos += m.end()
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval > 65535:
        raise DataError(f"unsupported PNM maxval {maxval} in {path}")
    pos += 1  # single whitespace byte after maxval
    n_ch = 1 if data[:2] == b"P5" else 3
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * n_ch
    raw = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    if raw.size != count:
        raise DataError(f"truncated PNM payload in {path}")
    arr = raw.astype(np.float64).reshape(height, width, n_ch)
    return [arr[:, :, k].copy() for k in range(n_ch)], maxval


def save_channels(path, channels: list[np.ndarray], maxval: int) -> None:
    """Write channels to PNG or binary PGM/PPM, chosen by file suffix.

    Values are clipped to [0, maxval] and rounded to integers.
    """
    path = Path(path)
    if maxval not in (255, 65535):
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    quant = [np.clip(np.rint(ch), 0, maxval) for ch in channels]
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        _save_pnm(path, quant, maxval)
    elif suffix == ".png":
        _save_png(path, quant, maxval)
    else:
        raise ValueError(f"unsupported output format {suffix!r}")


def _save_png(path: Path, quant: list[np.ndarray], maxval: int) -> None:
    if maxval == 65535:
        if len(quant) != 1:
            raise ValueError("16-bit output supports a single channel only")
        im = PILImage.fromarray(quant[0].astype(np.uint16), mode="I;16")
    elif len(quant) == 1:
        im = PILImage.fromarray(quant[0].astype(np.uint8), mode="L")
    elif len(quant) == 3:
        im = PILImage.fromarray(np.stack(quant, axis=-1).astype(np.uint8), mode="RGB")
    else:
        raise ValueError(f"cannot write {len(quant)} channels")
    im.save(path)


def _save_pnm(path: Path, quant: list[np.ndarray], maxval: int) -> None:
    if len(quant) == 1:
        magic, stacked = b"P5", quant[0][:, :, None]
    elif len(quant) == 3:
        magic, stacked = b"P6", np.stack(quant, axis=-1)
    else:
        raise ValueError(f"cannot write {len(quant)} channels")
    height, width = stacked.shape[:2]
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n%d\n" % (width, height, maxval))
        fh.write(stacked.astype(dtype).tobytes())


def load_image(path) -> tuple[list[Image], int]:
    """Read an image as per-channel :class:`Image` values plus maxval."""
    channels, maxval = load_channels(path)
    return [Image.from_grid(ch) for ch in channels], maxval


def load_mask(path) -> Mask:
    """Read a mask image: value 0 marks the suppressed region."""
    channels, _ = load_channels(path)
    flat = channels[0]
    if len(channels) == 3:
        flat = channels[0] + channels[1] + channels[2]
    return Mask.from_grid(flat == 0)


def save_mask(path, mask: Mask) -> None:
    """Write a mask as an 8-bit image (0 inside the band, 255 outside)."""
    band = mask.as_grid()
    save_channels(path, [np.where(band, 0.0, 255.0)], 255)
