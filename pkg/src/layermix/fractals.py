"""Mixing-picture bank: load a directory of structurally complex images and
serve random grayscale, flipped, size-matched crops of them.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EmptyBankError, ParameterError, ShapeMismatchError
from .imgio import list_image_files, load_image
from .rng import RngStream
from .transforms import grayscale as to_grayscale


class CachePolicy(Enum):
    LOAD_ALL = "load_all"
    LAZY = "lazy"


def flip_horizontal(img: np.ndarray) -> np.ndarray:
    return img[:, ::-1].copy()


def flip_vertical(img: np.ndarray) -> np.ndarray:
    return img[::-1].copy()


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize with edge clamping (pixel-center alignment)."""
    if out_h < 1 or out_w < 1:
        raise ParameterError(f"target size must be positive, got {(out_h, out_w)}")
    h, w = img.shape[:2]
    if (out_h, out_w) == (h, w):
        return img.copy()
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.intp)
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = np.clip(ys - y0, 0.0, 1.0)[:, np.newaxis, np.newaxis]
    fx = np.clip(xs - x0, 0.0, 1.0)[np.newaxis, :, np.newaxis]
    top = (1 - fx) * img[y0][:, x0] + fx * img[y0][:, x1]
    bot = (1 - fx) * img[y1][:, x0] + fx * img[y1][:, x1]
    return np.clip((1 - fy) * top + fy * bot, 0.0, 1.0)


@dataclass
class FractalBank:
    root_path: str
    entries: list[str]
    grayscale: bool
    cache_policy: CachePolicy = CachePolicy.LOAD_ALL
    _cache: list = field(default_factory=list, repr=False)

    @property
    def count(self) -> int:
        return len(self.entries)

    def image_at(self, index: int) -> np.ndarray:
        if self.cache_policy is CachePolicy.LOAD_ALL:
            return self._cache[index]
        img = load_image(os.path.join(self.root_path, self.entries[index]))
        return to_grayscale(img) if self.grayscale else img


def _read_manifest(path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def load_bank(
    root,
    grayscale: bool = True,
    manifest=None,
    cache_policy: CachePolicy = CachePolicy.LOAD_ALL,
) -> FractalBank:
    """Scan (or read from a manifest) and validate the bank under ``root``.

    Undecodable files are skipped with a warning; an empty result is an error.
    """
    root = os.fspath(root)
    if not os.path.isdir(root):
        raise FileNotFoundError(f"bank directory does not exist: {root}")
    candidates = _read_manifest(manifest) if manifest else list_image_files(root)
    entries: list[str] = []
    cache: list[np.ndarray] = []
    for rel in candidates:
        try:
            img = load_image(os.path.join(root, rel))
        except Exception as exc:  # undecodable or unreadable entry
            warnings.warn(f"skipping undecodable bank entry {rel!r}: {exc}")
            continue
        entries.append(rel)
        if cache_policy is CachePolicy.LOAD_ALL:
            cache.append(to_grayscale(img) if grayscale else img)
    if not entries:
        raise EmptyBankError(f"no decodable images found under {root}")
    return FractalBank(root, entries, grayscale, cache_policy, cache)


def _match_channels(img: np.ndarray, channels: int) -> np.ndarray:
    if img.shape[2] == channels:
        return img
    if channels == 1:
        # bank entries are RGB; gray-mode entries have equal channels already
        return to_grayscale(img)[:, :, :1]
    return np.repeat(img[:, :, :1], channels, axis=2)


def sample_fractal(bank: FractalBank, rng: RngStream, target_shape) -> np.ndarray:
    """Serve one bank entry: uniform choice, random flips, resize + crop.

    Consumes draws in the order: entry index, horizontal-flip coin,
    vertical-flip coin, crop row offset, crop column offset.
    """
    if bank.count == 0:
        raise EmptyBankError("fractal bank is empty")
    if len(target_shape) != 3:
        raise ShapeMismatchError(f"target shape must be HxWxC, got {tuple(target_shape)}")
    t_h, t_w, t_c = int(target_shape[0]), int(target_shape[1]), int(target_shape[2])

    img = bank.image_at(rng.randint_below(bank.count))
    if rng.bernoulli(0.5):
        img = flip_horizontal(img)
    if rng.bernoulli(0.5):
        img = flip_vertical(img)

    h, w = img.shape[:2]
    # Scale the shorter side (relative to the target) up so both dimensions
    # cover the target, then crop at a uniform offset.
    scale = max(t_h / h, t_w / w)
    new_h = max(t_h, int(round(h * scale)))
    new_w = max(t_w, int(round(w * scale)))
    img = resize_bilinear(img, new_h, new_w)
    dy = rng.randint_below(new_h - t_h + 1)
    dx = rng.randint_below(new_w - t_w + 1)
    img = img[dy : dy + t_h, dx : dx + t_w]
    return _match_channels(img, t_c).copy()
