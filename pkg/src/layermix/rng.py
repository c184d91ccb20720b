"""Deterministic sampling layer: seedable streams and every distribution the
augmentation pipeline draws from.

All randomness in the package flows through :class:`RngStream`, a thin wrapper
around a counter-based Philox generator keyed by ``(seed, stream_id)``.  Two
streams with the same key replay the same sequence on any platform; streams
with different keys are statistically independent, so batch work can hand one
stream to each work item and stay reproducible regardless of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    The stream is single-owner: it is cheap to construct, so allocate one per
    work item instead of sharing across threads.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> "RngStream":
        """Fresh stream with the same seed and a new stream id."""
        return RngStream(self.seed, stream_id)

    def random(self, size=None):
        """Uniform float64 draw(s) in [0, 1)."""
        return self._gen.random(size)

    def bernoulli(self, p: float = 0.5, size=None):
        """Boolean draw(s), True with probability ``p``."""
        return self.random(size) < p

    def randint_below(self, n: int, size=None):
        """Uniform integer draw(s) in {0, ..., n-1}, derived from uniforms."""
        if n <= 0:
            raise ParameterError(f"randint_below needs n >= 1, got {n}")
        draw = np.floor(self.random(size) * n).astype(np.int64)
        if size is None:
            return int(draw)
        return draw

    def normal(self, loc=0.0, scale=1.0, size=None):
        """Gaussian draw(s); used by the Monte-Carlo covariance estimators."""
        return self._gen.normal(loc, scale, size)


class BetaSide(Enum):
    """Which shape parameter of the Beta draw is fixed at one."""

    ALPHA_IS_ONE = "alpha_is_one"  # B(1, shape), CDF 1 - (1-x)^shape
    BETA_IS_ONE = "beta_is_one"    # B(shape, 1), CDF x^shape


def beta_unit_shape(rng: RngStream, shape: float, side: BetaSide, size=None):
    """Draw from B(shape, 1) or B(1, shape) by inverting the closed-form CDF.

    Only these one-unit-shape cases are needed by the blending-coefficient
    law, and inverse-CDF sampling keeps them exact and branch-free.
    """
    if shape <= 0:
        raise ParameterError(f"beta shape must be positive, got {shape}")
    u = rng.random(size)
    if shape == 1:  # B(1,1) is uniform; skip the (exact) no-op powers
        return u
    if side is BetaSide.BETA_IS_ONE:
        return u ** (1.0 / shape)
    if side is BetaSide.ALPHA_IS_ONE:
        return 1.0 - (1.0 - u) ** (1.0 / shape)
    raise ParameterError(f"unknown beta side {side!r}")


class ConicWeights(NamedTuple):
    """Blending coefficients (a, b) with a in [0, 2], b in [-1, 1].

    Drawn so that E[a] = 1 and E[b] = 0, hence E[a + b] = 1: the blend is a
    conic combination that preserves intensity scale in expectation while
    allowing individual draws to leave the convex simplex.
    """

    a: float
    b: float


def sample_conic_weights(rng: RngStream, beta: float) -> ConicWeights:
    """Draw one (a, b) pair from the Beta-mixture blending law.

    ``a`` comes from an equal mixture of B(beta, 1) on [0, 1] and
    1 + B(1, beta) on [1, 2]; ``b`` from an equal mixture of B(1, beta) on
    [0, 1] and its negation on [-1, 0].  The two mixture branches use
    independent fair coin flips.  Consumes exactly four uniforms, in the
    order: branch(a), value(a), branch(b), value(b).
    """
    if beta <= 0:
        raise ParameterError(f"blending ratio must be positive, got {beta}")
    shift_a = rng.bernoulli(0.5)
    if shift_a:
        a = 1.0 + beta_unit_shape(rng, beta, BetaSide.ALPHA_IS_ONE)
    else:
        a = beta_unit_shape(rng, beta, BetaSide.BETA_IS_ONE)
    negate_b = rng.bernoulli(0.5)
    mag_b = beta_unit_shape(rng, beta, BetaSide.ALPHA_IS_ONE)
    b = -mag_b if negate_b else mag_b
    return ConicWeights(float(a), float(b))


def conic_weight_samples(rng: RngStream, beta: float, n: int):
    """Vectorized draw of n (a, b) pairs; same law as sample_conic_weights.

    Uniforms are consumed in four blocks of n (branch(a), value(a),
    branch(b), value(b)) rather than interleaved per pair, so the stream
    positions differ from n scalar calls while the distribution is identical.
    Returns arrays (a, b) of shape (n,).
    """
    if beta <= 0:
        raise ParameterError(f"blending ratio must be positive, got {beta}")
    if n < 1:
        raise ParameterError(f"need n >= 1 draws, got {n}")
    inv = 1.0 / beta
    shift_a = rng.random(n) < 0.5
    u_a = rng.random(n)
    a = np.where(shift_a, 2.0 - (1.0 - u_a) ** inv, u_a ** inv)
    negate_b = rng.random(n) < 0.5
    mag_b = 1.0 - (1.0 - rng.random(n)) ** inv
    b = np.where(negate_b, -mag_b, mag_b)
    return a, b


def conic_weight_moments(beta: float) -> dict:
    """Closed-form mean/variance of a, b and their sum under the mixture law.

    Used to turn empirical checks into standard-error statements.
    """
    if beta <= 0:
        raise ParameterError(f"blending ratio must be positive, got {beta}")
    # Component moments: E[B(beta,1)] = beta/(beta+1), E[B(beta,1)^2] = beta/(beta+2),
    # E[B(1,beta)] = 1/(beta+1),   E[B(1,beta)^2] = 2/((beta+1)(beta+2)).
    m_b1 = 1.0 / (beta + 1.0)
    m2_b1 = 2.0 / ((beta + 1.0) * (beta + 2.0))
    mean_a = 1.0
    e_a2 = 0.5 * (beta / (beta + 2.0)) + 0.5 * (1.0 + 2.0 * m_b1 + m2_b1)
    var_a = e_a2 - mean_a**2
    mean_b = 0.0
    var_b = m2_b1
    return {
        "mean_a": mean_a,
        "var_a": var_a,
        "mean_b": mean_b,
        "var_b": var_b,
        "mean_sum": 1.0,
        "var_sum": var_a + var_b,  # a and b are independent
    }


class BlendMethod(Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    PIXEL_MIX = "pixel_mix"
    ELEMENT_MIX = "element_mix"


class BlendMethodId(NamedTuple):
    """A blend method together with its selection probability."""

    tag: BlendMethod
    probability: float


#: Reweighted mixture over blend methods: the averaging blends carry twice
#: the mass of the masked blends.
DEFAULT_BLEND_WEIGHTS: tuple[BlendMethodId, ...] = (
    BlendMethodId(BlendMethod.ARITHMETIC, 1.0 / 3.0),
    BlendMethodId(BlendMethod.GEOMETRIC, 1.0 / 3.0),
    BlendMethodId(BlendMethod.PIXEL_MIX, 1.0 / 6.0),
    BlendMethodId(BlendMethod.ELEMENT_MIX, 1.0 / 6.0),
)


def _validated_probs(weights: Sequence[BlendMethodId]) -> np.ndarray:
    if len(weights) == 0:
        raise ParameterError("weight list must not be empty")
    probs = np.array([w.probability for w in weights], dtype=np.float64)
    if np.any(probs < 0):
        raise ParameterError("blend probabilities must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ParameterError(
            f"blend probabilities must sum to 1 within 1e-9, got {probs.sum()!r}"
        )
    return probs


def choose_blend_method(
    rng: RngStream, weights: Sequence[BlendMethodId] = DEFAULT_BLEND_WEIGHTS
) -> BlendMethodId:
    """Multinomial draw over blend methods.  Consumes one uniform."""
    probs = _validated_probs(weights)
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, rng.random(), side="right"))
    return weights[min(idx, len(weights) - 1)]


def blend_method_samples(
    rng: RngStream, weights: Sequence[BlendMethodId], n: int
) -> np.ndarray:
    """Vectorized multinomial draw; returns n indices into ``weights``."""
    probs = _validated_probs(weights)
    cum = np.cumsum(probs)
    idx = np.searchsorted(cum, rng.random(n), side="right")
    return np.minimum(idx, len(weights) - 1)


def choose_layer_exit(rng: RngStream, size=None):
    """Uniform draw over the three pipeline exit layers {0, 1, 2}."""
    return rng.randint_below(3, size=size)
