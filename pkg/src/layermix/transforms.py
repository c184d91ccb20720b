"""Label-preserving image transformations over a shared magnitude scale.

Eleven kinds: three parameter-free pixel operators (equalize, grayscale,
autocontrast) and eight parameterized ones whose effective level is drawn
uniformly from [0, (m/10) * range_max], with an independent fair sign flip
where direction is meaningful.  Every public operation returns a new array
with intensities in [0, 1] and the input shape preserved.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError
from .imgio import require_image


class TransformKind(Enum):
    EQUALIZE = "equalize"
    GRAYSCALE = "grayscale"
    AUTOCONTRAST = "autocontrast"
    BRIGHTNESS = "brightness"
    POSTERIZE = "posterize"
    SOLARIZE = "solarize"
    ROTATE = "rotate"
    SHEAR_X = "shear_x"
    SHEAR_Y = "shear_y"
    TRANSLATE_X = "translate_x"
    TRANSLATE_Y = "translate_y"


class TransformDescriptor(NamedTuple):
    kind: TransformKind
    magnitude_range: Optional[tuple[float, float]]  # None for parameter-free kinds
    signed: bool

    @property
    def parameterized(self) -> bool:
        return self.magnitude_range is not None

    @property
    def level_max(self) -> float:
        """Largest unsigned level at magnitude 10."""
        if self.magnitude_range is None:
            return 0.0
        lo, hi = self.magnitude_range
        if lo == 0.0:
            # Range states the unsigned swing (translate: sign picks direction).
            return hi
        # Range is centered — on 0 for geometry, on 1 for brightness — so the
        # swing is half the span.
        return (hi - lo) / 2.0


TRANSFORM_TABLE: tuple[TransformDescriptor, ...] = (
    TransformDescriptor(TransformKind.EQUALIZE, None, False),
    TransformDescriptor(TransformKind.GRAYSCALE, None, False),
    TransformDescriptor(TransformKind.AUTOCONTRAST, None, False),
    TransformDescriptor(TransformKind.BRIGHTNESS, (0.1, 1.9), True),
    TransformDescriptor(TransformKind.POSTERIZE, (0.0, 4.0), False),
    TransformDescriptor(TransformKind.SOLARIZE, (0.0, 1.0), False),
    TransformDescriptor(TransformKind.ROTATE, (-30.0, 30.0), True),
    TransformDescriptor(TransformKind.SHEAR_X, (-0.3, 0.3), True),
    TransformDescriptor(TransformKind.SHEAR_Y, (-0.3, 0.3), True),
    TransformDescriptor(TransformKind.TRANSLATE_X, (0.0, 0.33), True),
    TransformDescriptor(TransformKind.TRANSLATE_Y, (0.0, 0.33), True),
)

_BY_KIND = {d.kind: d for d in TRANSFORM_TABLE}


def descriptor_for(kind: TransformKind) -> TransformDescriptor:
    return _BY_KIND[kind]


# ---------------------------------------------------------------------------
# pixel operators


def grayscale(img: np.ndarray) -> np.ndarray:
    """Luminance-weighted channel collapse, replicated back across channels.

    Already-gray inputs are returned as an exact copy so the operator is
    bit-exact idempotent despite the weights not summing to 1.0 in float64.
    """
    require_image(img)
    if img.shape[2] == 1:
        return img.copy()
    if np.array_equal(img[:, :, 0], img[:, :, 1]) and np.array_equal(
        img[:, :, 0], img[:, :, 2]
    ):
        return img.copy()
    lum = 0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]
    lum = np.clip(lum, 0.0, 1.0)
    return np.repeat(lum[:, :, np.newaxis], img.shape[2], axis=2)


def autocontrast(img: np.ndarray) -> np.ndarray:
    """Per-channel linear stretch of the intensity range to [0, 1]."""
    require_image(img)
    out = img.copy()
    for c in range(img.shape[2]):
        lo = out[:, :, c].min()
        hi = out[:, :, c].max()
        if hi > lo:
            out[:, :, c] = (out[:, :, c] - lo) / (hi - lo)
    return np.clip(out, 0.0, 1.0)


def equalize(img: np.ndarray) -> np.ndarray:
    """Histogram equalization per channel on the 8-bit quantization grid."""
    require_image(img)
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        q = np.rint(img[:, :, c] * 255.0).astype(np.int64)
        hist = np.bincount(q.ravel(), minlength=256)
        step = (hist.sum() - hist[255]) // 255
        if step == 0:
            out[:, :, c] = img[:, :, c]
            continue
        shifted = step // 2 + np.concatenate(([0], np.cumsum(hist)[:-1]))
        lut = np.clip(shifted // step, 0, 255)
        out[:, :, c] = lut[q] / 255.0
    return out


def brightness(img: np.ndarray, factor: float) -> np.ndarray:
    """Multiply intensities by a nonnegative factor, clipped to [0, 1]."""
    require_image(img)
    if factor < 0:
        raise ParameterError(f"brightness factor must be >= 0, got {factor}")
    return np.clip(img * factor, 0.0, 1.0)


def posterize(img: np.ndarray, bits_removed: int) -> np.ndarray:
    """Drop the given number of low-order bits of the 8-bit quantization."""
    require_image(img)
    if not 0 <= int(bits_removed) <= 8 or bits_removed != int(bits_removed):
        raise ParameterError(f"bits_removed must be an integer in [0,8], got {bits_removed}")
    bits_removed = int(bits_removed)
    if bits_removed == 0:
        return img.copy()
    q = np.rint(img * 255.0).astype(np.uint8)
    mask = np.uint8((0xFF << bits_removed) & 0xFF)
    return (q & mask) / 255.0


def solarize(img: np.ndarray, threshold: float) -> np.ndarray:
    """Invert every intensity at or above the threshold."""
    require_image(img)
    if not 0.0 <= threshold <= 1.0:
        raise ParameterError(f"solarize threshold must be in [0,1], got {threshold}")
    return np.where(img >= threshold, 1.0 - img, img)


# ---------------------------------------------------------------------------
# geometric operators (inverse-mapped affine, bilinear, zero fill)


def _affine_sample(img: np.ndarray, inverse) -> np.ndarray:
    """Resample img at inverse-mapped output coordinates.

    ``inverse(x, y) -> (x_in, y_in)`` receives output pixel grids and returns
    the source location for each; out-of-canvas samples contribute zero.
    """
    h, w = img.shape[:2]
    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    x_in, y_in = inverse(xs, ys)

    x0 = np.floor(x_in)
    y0 = np.floor(y_in)
    fx = (x_in - x0)[:, :, np.newaxis]
    fy = (y_in - y0)[:, :, np.newaxis]
    out = np.zeros_like(img)
    corners = (
        (y0, x0, (1 - fy) * (1 - fx)),
        (y0, x0 + 1, (1 - fy) * fx),
        (y0 + 1, x0, fy * (1 - fx)),
        (y0 + 1, x0 + 1, fy * fx),
    )
    for cy, cx, weight in corners:
        inside = (cy >= 0) & (cy < h) & (cx >= 0) & (cx < w)
        iy = np.clip(cy, 0, h - 1).astype(np.intp)
        ix = np.clip(cx, 0, w - 1).astype(np.intp)
        out += weight * inside[:, :, np.newaxis] * img[iy, ix]
    return np.clip(out, 0.0, 1.0)


def rotate(img: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the image center; exact copy at 0 degrees."""
    require_image(img)
    if degrees == 0:
        return img.copy()
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0

    def inverse(xs, ys):
        dx, dy = xs - cx, ys - cy
        return cos_t * dx + sin_t * dy + cx, -sin_t * dx + cos_t * dy + cy

    return _affine_sample(img, inverse)


def shear_x(img: np.ndarray, amount: float) -> np.ndarray:
    """Horizontal shear about the image center."""
    require_image(img)
    if amount == 0:
        return img.copy()
    h = img.shape[0]
    cy = (h - 1) / 2.0

    def inverse(xs, ys):
        return xs + amount * (ys - cy), ys

    return _affine_sample(img, inverse)


def shear_y(img: np.ndarray, amount: float) -> np.ndarray:
    """Vertical shear about the image center."""
    require_image(img)
    if amount == 0:
        return img.copy()
    w = img.shape[1]
    cx = (w - 1) / 2.0

    def inverse(xs, ys):
        return xs, ys + amount * (xs - cx)

    return _affine_sample(img, inverse)


def translate_x(img: np.ndarray, fraction: float) -> np.ndarray:
    """Shift horizontally by a fraction of the image width."""
    require_image(img)
    if fraction == 0:
        return img.copy()
    dx = fraction * img.shape[1]

    def inverse(xs, ys):
        return xs - dx, ys

    return _affine_sample(img, inverse)


def translate_y(img: np.ndarray, fraction: float) -> np.ndarray:
    """Shift vertically by a fraction of the image height."""
    require_image(img)
    if fraction == 0:
        return img.copy()
    dy = fraction * img.shape[0]

    def inverse(xs, ys):
        return xs, ys - dy

    return _affine_sample(img, inverse)


# ---------------------------------------------------------------------------
# magnitude plumbing


def _require_magnitude(magnitude: int):
    if magnitude != int(magnitude) or not 0 <= int(magnitude) <= 10:
        raise ParameterError(f"magnitude must be an integer in [0,10], got {magnitude}")


def sample_level(desc: TransformDescriptor, magnitude: int, rng) -> float:
    """Draw the signed effective level for one application.

    Uniform in [0, (magnitude/10) * level_max], then a fair sign flip for
    signed kinds.  Parameter-free kinds consume no randomness and return 0.
    """
    _require_magnitude(magnitude)
    if not desc.parameterized:
        return 0.0
    level = rng.random() * (int(magnitude) / 10.0) * desc.level_max
    if desc.signed:
        if rng.bernoulli(0.5):
            level = -level
    return float(level)


def apply_transform(img: np.ndarray, desc: TransformDescriptor, magnitude: int, rng) -> np.ndarray:
    """Apply one transform at the given magnitude; always returns a new array."""
    require_image(img)
    _require_magnitude(magnitude)
    kind = desc.kind
    if kind is TransformKind.EQUALIZE:
        return equalize(img)
    if kind is TransformKind.GRAYSCALE:
        return grayscale(img)
    if kind is TransformKind.AUTOCONTRAST:
        return autocontrast(img)

    level = sample_level(desc, magnitude, rng)
    if level == 0.0:
        return img.copy()
    if kind is TransformKind.BRIGHTNESS:
        return brightness(img, 1.0 + level)
    if kind is TransformKind.POSTERIZE:
        return posterize(img, int(level))
    if kind is TransformKind.SOLARIZE:
        return solarize(img, 1.0 - level)
    if kind is TransformKind.ROTATE:
        return rotate(img, level)
    if kind is TransformKind.SHEAR_X:
        return shear_x(img, level)
    if kind is TransformKind.SHEAR_Y:
        return shear_y(img, level)
    if kind is TransformKind.TRANSLATE_X:
        return translate_x(img, level)
    if kind is TransformKind.TRANSLATE_Y:
        return translate_y(img, level)
    raise ParameterError(f"unknown transform kind {kind!r}")


def sample_transform(rng) -> TransformDescriptor:
    """Uniform draw over the eleven transform kinds."""
    return TRANSFORM_TABLE[rng.randint_below(len(TRANSFORM_TABLE))]
