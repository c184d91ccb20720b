"""Image representation and file I/O.

Images are float64 arrays of shape H×W×C (C = 1 or 3) with intensities in
[0, 1].  PNG/JPEG decode and encode go through Pillow; everything else in the
package operates on the arrays directly.
"""

from __future__ import annotations

import os

import numpy as np
from PIL import Image as PILImage

from .errors import ParameterError, ShapeMismatchError

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def require_image(arr: np.ndarray, name: str = "image") -> np.ndarray:
    """Validate the H×W×C-in-[0,1] contract; returns the array unchanged."""
    if not isinstance(arr, np.ndarray):
        raise ParameterError(f"{name} must be a numpy array, got {type(arr).__name__}")
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeMismatchError(
            f"{name} must have shape HxWxC with C in {{1,3}}, got {arr.shape}"
        )
    if not np.issubdtype(arr.dtype, np.floating):
        raise ParameterError(f"{name} must be a float array, got dtype {arr.dtype}")
    if arr.size == 0:
        raise ShapeMismatchError(f"{name} must be non-empty, got shape {arr.shape}")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < 0.0 or hi > 1.0:
        raise ParameterError(f"{name} intensities must lie in [0,1], got [{lo}, {hi}]")
    return arr


def require_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")


def to_unit_float(arr: np.ndarray) -> np.ndarray:
    """uint8 H×W[×C] → float64 in [0,1]; 2-D input gains a channel axis."""
    out = np.asarray(arr, dtype=np.float64) / 255.0
    if out.ndim == 2:
        out = out[:, :, np.newaxis]
    return out


def to_uint8(img: np.ndarray) -> np.ndarray:
    """[0,1] floats → uint8 by round(x*255); the quantization used on save."""
    return np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG file into a float64 H×W×3 array in [0,1]."""
    with PILImage.open(path) as im:
        return to_unit_float(np.asarray(im.convert("RGB")))


def save_image(path, img: np.ndarray):
    """Encode a [0,1] float image as 8-bit PNG (lossless after quantization)."""
    require_image(img)
    q = to_uint8(img)
    if q.shape[2] == 1:
        pil = PILImage.fromarray(q[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(q, mode="RGB")
    pil.save(path, format="PNG")


def list_image_files(root) -> list[str]:
    """Relative paths of all decodable-suffix files under root, sorted."""
    found = []
    for dirpath, _dirnames, filenames in os.walk(root):
        for fn in filenames:
            if fn.lower().endswith(IMAGE_SUFFIXES):
                found.append(os.path.relpath(os.path.join(dirpath, fn), root))
    return sorted(found)
