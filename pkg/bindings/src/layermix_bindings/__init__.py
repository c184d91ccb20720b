"""Dataloader-facing surface for the layermix pipeline.

A :class:`BoundAugmenter` loads the mixing-picture bank once and is immutable
afterwards, so a single instance can be shared across loader workers; callers
pass an explicit ``stream_id`` per sample (e.g. ``epoch * len(dataset) + index``)
and reproducibility follows from the pipeline's keyed-stream RNG contract.

Only the pipeline entry point crosses this boundary — transforms, blends,
covariance analysis and metrics stay in the core package.  Arrays cross as
copies in both directions: the input buffer is never retained and the output
never aliases it.
"""

from __future__ import annotations

import numpy as np

import layermix as _lm

__all__ = ["AugmentInputError", "BoundAugmenter", "make_augmenter", "augment_array"]
__version__ = "0.1.0"


class AugmentInputError(ValueError):
    """An argument to ``augment_array`` violates its contract."""


def _canonical_image(img) -> np.ndarray:
    """Validate the H×W×C float-in-[0,1] contract; return a private float64 copy."""
    if not isinstance(img, np.ndarray):
        raise AugmentInputError(f"expected a numpy array, got {type(img).__name__}")
    if not np.issubdtype(img.dtype, np.floating):
        raise AugmentInputError(f"expected a float array, got dtype {img.dtype}")
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise AugmentInputError(f"expected shape HxWxC with C in {{1,3}}, got {img.shape}")
    if img.size == 0:
        raise AugmentInputError(f"expected a non-empty array, got shape {img.shape}")
    if not img.flags.c_contiguous:
        raise AugmentInputError("expected a C-contiguous array; pass np.ascontiguousarray(img)")
    if not np.isfinite(img).all():
        raise AugmentInputError("image contains non-finite values")
    lo, hi = float(img.min()), float(img.max())
    if lo < 0.0 or hi > 1.0:
        raise AugmentInputError(f"intensities must lie in [0,1], got [{lo}, {hi}]")
    return np.array(img, dtype=np.float64, order="C")


class BoundAugmenter:
    """Immutable handle pairing a loaded bank with a pipeline configuration.

    Construct via :func:`make_augmenter`.  Safe to call from multiple threads
    as long as each sample gets its own ``stream_id``.
    """

    __slots__ = ("_bank", "_config")

    def __init__(self, bank: "_lm.FractalBank", config: "_lm.PipelineConfig"):
        self._bank = bank
        self._config = config

    @property
    def magnitude(self) -> int:
        return self._config.magnitude

    @property
    def beta(self) -> float:
        return self._config.blending_ratio

    @property
    def seed(self) -> int:
        return self._config.seed

    @property
    def grayscale(self) -> bool:
        return self._config.grayscale_fractals

    @property
    def bank_size(self) -> int:
        return self._bank.count

    def augment_array(self, img: np.ndarray, stream_id: int) -> np.ndarray:
        """Run the pipeline on one image; equal (bytes, stream_id) ⇒ equal output."""
        if isinstance(stream_id, bool) or not isinstance(stream_id, (int, np.integer)):
            raise AugmentInputError(
                f"stream_id must be an integer, got {type(stream_id).__name__}"
            )
        work = _canonical_image(img)
        return _lm.augment_one(work, self._bank, self._config, int(stream_id)).image

    def __repr__(self) -> str:
        return (
            f"BoundAugmenter(bank={self.bank_size} entries, magnitude={self.magnitude}, "
            f"beta={self.beta}, seed={self.seed}, grayscale={self.grayscale})"
        )


def make_augmenter(
    fractal_dir,
    magnitude: int = 8,
    beta: float = 3.0,
    seed: int = 0,
    grayscale: bool = True,
) -> BoundAugmenter:
    """Load the mixing-picture bank under ``fractal_dir`` and bind it to a config.

    The bank is read once, up front.  Raises ``FileNotFoundError`` when the
    directory does not exist and ``layermix.EmptyBankError`` when nothing in it
    decodes; configuration errors surface as ``layermix.ParameterError``.
    """
    config = _lm.PipelineConfig(
        magnitude=magnitude,
        blending_ratio=beta,
        grayscale_fractals=grayscale,
        seed=seed,
    )
    bank = _lm.load_bank(fractal_dir, grayscale=grayscale)
    return BoundAugmenter(bank, config)


def augment_array(augmenter: BoundAugmenter, img: np.ndarray, stream_id: int) -> np.ndarray:
    """Functional form of :meth:`BoundAugmenter.augment_array`."""
    if not isinstance(augmenter, BoundAugmenter):
        raise AugmentInputError(
            f"expected a BoundAugmenter, got {type(augmenter).__name__}"
        )
    return augmenter.augment_array(img, stream_id)
