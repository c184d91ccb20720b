"""The layered mixing pipeline.

One call draws an exit layer uniformly from {0,1,2} and a single transform
kind that is shared by every augmentation stage of the call (the source of
the between-stage covariance this package analyzes).  Blend stages stay
independent: layer 1 blends the twice-augmented pair, layer 2 additionally
blends in a mixing picture from the bank and re-applies the shared kind.

``iid_pipeline`` is the contrast structure: identical layout, but every
augmentation stage resamples its transform kind independently.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blending import DEFAULT_GEOMETRIC_EPS, blend
from .errors import ParameterError, ShapeMismatchError
from .fractals import FractalBank, sample_fractal
from .imgio import require_image
from .rng import (
    BlendMethodId,
    DEFAULT_BLEND_WEIGHTS,
    RngStream,
    choose_blend_method,
    choose_layer_exit,
)
from .transforms import (
    TransformKind,
    apply_transform,
    sample_transform,
)

_DEFAULT_PROBS = tuple(w.probability for w in DEFAULT_BLEND_WEIGHTS)


@dataclass(frozen=True)
class PipelineConfig:
    magnitude: int = 8
    blending_ratio: float = 3.0
    blend_probabilities: tuple[float, float, float, float] = _DEFAULT_PROBS
    grayscale_fractals: bool = True
    seed: int = 0
    eps_geometric: float = DEFAULT_GEOMETRIC_EPS

    def __post_init__(self):
        if self.magnitude != int(self.magnitude) or not 0 <= int(self.magnitude) <= 10:
            raise ParameterError(
                f"magnitude must be an integer in [0,10], got {self.magnitude}"
            )
        if self.blending_ratio <= 0:
            raise ParameterError(
                f"blending_ratio must be positive, got {self.blending_ratio}"
            )
        if len(self.blend_probabilities) != len(DEFAULT_BLEND_WEIGHTS):
            raise ParameterError(
                f"need {len(DEFAULT_BLEND_WEIGHTS)} blend probabilities, "
                f"got {len(self.blend_probabilities)}"
            )
        if any(p < 0 for p in self.blend_probabilities):
            raise ParameterError("blend probabilities must be nonnegative")
        total = float(sum(self.blend_probabilities))
        if abs(total - 1.0) > 1e-9:
            raise ParameterError(f"blend probabilities must sum to 1, got {total!r}")

    def blend_weights(self) -> tuple[BlendMethodId, ...]:
        return tuple(
            BlendMethodId(base.tag, p)
            for base, p in zip(DEFAULT_BLEND_WEIGHTS, self.blend_probabilities)
        )


@dataclass(frozen=True)
class LayerSample:
    image: np.ndarray
    exit_layer: int
    transform_kind: TransformKind
    blend_trace: tuple[BlendMethodId, ...]
    stage_kinds: tuple[TransformKind, ...] = field(default=())

    def __post_init__(self):
        if len(self.blend_trace) != self.exit_layer:
            raise ParameterError(
                f"exit layer {self.exit_layer} requires {self.exit_layer} blends, "
                f"trace has {len(self.blend_trace)}"
            )


def _run(img, bank, cfg, rng, shared_kind: bool, force_exit):
    require_image(img)
    weights = cfg.blend_weights()
    m, beta, eps = cfg.magnitude, cfg.blending_ratio, cfg.eps_geometric

    step = choose_layer_exit(rng)
    if force_exit is not None:
        if force_exit not in (0, 1, 2):
            raise ParameterError(f"force_exit must be in {{0,1,2}}, got {force_exit}")
        step = force_exit

    desc = sample_transform(rng)
    stage_kinds = [desc.kind]
    out = apply_transform(img, desc, m, rng)
    if step == 0:
        return LayerSample(out, 0, desc.kind, (), tuple(stage_kinds))

    desc2 = desc if shared_kind else sample_transform(rng)
    stage_kinds.append(desc2.kind)
    img_2 = apply_transform(img, desc2, m, rng)
    method_1 = choose_blend_method(rng, weights)
    out = blend(out, img_2, method_1, rng, beta, eps)
    if step == 1:
        return LayerSample(out, 1, desc.kind, (method_1,), tuple(stage_kinds))

    mixing_pic = sample_fractal(bank, rng, img.shape)
    method_2 = choose_blend_method(rng, weights)
    out = blend(out, mixing_pic, method_2, rng, beta, eps)
    desc3 = desc if shared_kind else sample_transform(rng)
    stage_kinds.append(desc3.kind)
    out = apply_transform(out, desc3, m, rng)
    return LayerSample(out, 2, desc.kind, (method_1, method_2), tuple(stage_kinds))


def layermix(
    img: np.ndarray,
    bank: FractalBank,
    cfg: PipelineConfig,
    rng: RngStream,
    force_exit: int | None = None,
) -> LayerSample:
    """One augmentation pass with the transform kind shared across stages.

    ``force_exit`` pins the exit layer for previews and structural tests; the
    exit draw is still consumed so the remaining stream is unchanged.
    """
    return _run(img, bank, cfg, rng, shared_kind=True, force_exit=force_exit)


def iid_pipeline(
    img: np.ndarray,
    bank: FractalBank,
    cfg: PipelineConfig,
    rng: RngStream,
    force_exit: int | None = None,
) -> LayerSample:
    """Reference pass where each augmentation stage resamples its kind."""
    return _run(img, bank, cfg, rng, shared_kind=False, force_exit=force_exit)


def augment_one(
    img: np.ndarray, bank: FractalBank, cfg: PipelineConfig, stream_id: int
) -> LayerSample:
    """layermix under the per-item stream contract: key = (cfg.seed, stream_id)."""
    return layermix(img, bank, cfg, RngStream(cfg.seed, stream_id))


def layermix_batch(
    imgs,
    bank: FractalBank,
    cfg: PipelineConfig,
    parallel: bool = False,
    max_workers: int | None = None,
) -> list[LayerSample]:
    """Augment a batch; item i uses stream (cfg.seed, i), so results are
    independent of execution order and worker count."""
    imgs = list(imgs)
    if not imgs:
        return []
    shape = imgs[0].shape
    for i, im in enumerate(imgs):
        require_image(im, f"imgs[{i}]")
        if im.shape != shape:
            raise ShapeMismatchError(
                f"batch images must share a shape: imgs[{i}] has {im.shape}, expected {shape}"
            )
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(
                pool.map(lambda ix: augment_one(imgs[ix], bank, cfg, ix), range(len(imgs)))
            )
    return [augment_one(im, bank, cfg, i) for i, im in enumerate(imgs)]
