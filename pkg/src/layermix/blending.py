"""The four blending methods and their dispatch.

Two coefficient blends (arithmetic, geometric) weighted by ConicWeights, and
two masked blends (per-pixel, per-element) driven by a Bernoulli mask whose
rate is itself uniform per call.  Every blend clips to [0, 1] and preserves
shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError, ShapeMismatchError
from .imgio import require_image, require_same_shape
from .rng import (
    BlendMethod,
    BlendMethodId,
    ConicWeights,
    RngStream,
    sample_conic_weights,
)

DEFAULT_GEOMETRIC_EPS = 1e-5


class BlendGranularity(Enum):
    PER_PIXEL = "per_pixel"      # one bit per pixel, shared across channels
    PER_ELEMENT = "per_element"  # one bit per (pixel, channel) element


@dataclass(frozen=True)
class BlendMask:
    granularity: BlendGranularity
    data: np.ndarray  # bool, HxW for PER_PIXEL, HxWxC for PER_ELEMENT

    def fraction_true(self) -> float:
        return float(self.data.mean())


def sample_mask(rng: RngStream, shape, granularity: BlendGranularity) -> BlendMask:
    """Bernoulli(lam) mask with lam ~ Uniform(0,1) drawn fresh per call."""
    if len(shape) != 3:
        raise ShapeMismatchError(f"expected an HxWxC image shape, got {tuple(shape)}")
    lam = rng.random()
    if granularity is BlendGranularity.PER_PIXEL:
        data = rng.random(shape[:2]) < lam
    elif granularity is BlendGranularity.PER_ELEMENT:
        data = rng.random(tuple(shape)) < lam
    else:
        raise ParameterError(f"unknown granularity {granularity!r}")
    return BlendMask(granularity, data)


def _mask_for(mask: BlendMask, shape) -> np.ndarray:
    """Broadcast the mask against an image shape, validating compatibility."""
    if mask.granularity is BlendGranularity.PER_PIXEL:
        if mask.data.shape != tuple(shape[:2]):
            raise ShapeMismatchError(
                f"per-pixel mask {mask.data.shape} does not match image {tuple(shape)}"
            )
        return mask.data[:, :, np.newaxis]
    if mask.data.shape != tuple(shape):
        raise ShapeMismatchError(
            f"per-element mask {mask.data.shape} does not match image {tuple(shape)}"
        )
    return mask.data


def blend_arithmetic(z0: np.ndarray, z1: np.ndarray, w: ConicWeights) -> np.ndarray:
    require_image(z0, "z0")
    require_image(z1, "z1")
    require_same_shape(z0, z1)
    return np.clip(w.a * z0 + w.b * z1, 0.0, 1.0)


def blend_geometric(
    z0: np.ndarray, z1: np.ndarray, w: ConicWeights, eps: float = DEFAULT_GEOMETRIC_EPS
) -> np.ndarray:
    """2^(a+b-1) * (z0+eps)^a * (z1+eps)^b; eps guards 0 under b < 0."""
    require_image(z0, "z0")
    require_image(z1, "z1")
    require_same_shape(z0, z1)
    if eps < 0:
        raise ParameterError(f"eps must be >= 0, got {eps}")
    out = 2.0 ** (w.a + w.b - 1.0) * (z0 + eps) ** w.a * (z1 + eps) ** w.b
    return np.clip(out, 0.0, 1.0)


def blend_masked(z0: np.ndarray, z1: np.ndarray, mask: BlendMask) -> np.ndarray:
    require_image(z0, "z0")
    require_image(z1, "z1")
    require_same_shape(z0, z1)
    m = _mask_for(mask, z0.shape)
    return np.where(m, z0, z1)


def blend(
    z0: np.ndarray,
    z1: np.ndarray,
    method: BlendMethodId,
    rng: RngStream,
    beta: float,
    eps: float = DEFAULT_GEOMETRIC_EPS,
) -> np.ndarray:
    """Dispatch one blend, drawing its coefficients or mask from the stream."""
    tag = method.tag
    if tag is BlendMethod.ARITHMETIC:
        return blend_arithmetic(z0, z1, sample_conic_weights(rng, beta))
    if tag is BlendMethod.GEOMETRIC:
        return blend_geometric(z0, z1, sample_conic_weights(rng, beta), eps)
    if tag is BlendMethod.PIXEL_MIX:
        return blend_masked(z0, z1, sample_mask(rng, z0.shape, BlendGranularity.PER_PIXEL))
    if tag is BlendMethod.ELEMENT_MIX:
        return blend_masked(z0, z1, sample_mask(rng, z0.shape, BlendGranularity.PER_ELEMENT))
    raise ParameterError(f"unknown blend method {tag!r}")
