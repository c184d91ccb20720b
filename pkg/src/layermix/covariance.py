"""Between-stage covariance analysis of the shared-transform pipeline.

The pipeline draws one transform k per call and applies it at every stage i,
so the stage outputs are a mixture over k of per-stage laws with moments
(mu_ki, sigma_ki).  That sharing induces the cross-stage covariance

    K_ij = E_k[mu_ki * mu_kj] - E_k[mu_ki] * E_k[mu_kj]      (i != j)
    K_ii = E_k[sigma_ki^2] + E_k[mu_ki^2] - E_k[mu_ki]^2

while resampling k independently per stage (the iid reference) keeps the same
marginal diagonal but zeroes every off-diagonal entry.  This module computes
those matrices analytically from the per-transform stats and estimates them
by Monte Carlo on the scalar Gaussian surrogate process, which exercises the
formulas exactly because they involve only first and second moments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .rng import RngStream
from .transforms import TransformDescriptor, apply_transform

PIPELINE_SHARED = "layermix"
PIPELINE_IID = "iid"


@dataclass(frozen=True)
class TransformStats:
    """Per-transform, per-stage first/second moments and mixture weights.

    mu, sigma: arrays of shape (K, S) — K transforms, S stages.
    probs: array of shape (K,) summing to 1.
    """

    mu: np.ndarray
    sigma: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "probs", probs)
        if mu.ndim != 2 or mu.shape[0] < 1 or mu.shape[1] < 1:
            raise ParameterError(f"mu must be a (K,S) matrix with K,S >= 1, got {mu.shape}")
        if sigma.shape != mu.shape:
            raise ParameterError(
                f"sigma shape {sigma.shape} must match mu shape {mu.shape}"
            )
        if np.any(sigma < 0):
            raise ParameterError("sigma entries must be nonnegative")
        if probs.shape != (mu.shape[0],):
            raise ParameterError(
                f"probs must have shape ({mu.shape[0]},), got {probs.shape}"
            )
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise ParameterError("probs must be nonnegative and sum to 1")

    @property
    def n_transforms(self) -> int:
        return self.mu.shape[0]

    @property
    def n_stages(self) -> int:
        return self.mu.shape[1]


def analytic_autocovariance(stats: TransformStats) -> np.ndarray:
    """Auto-covariance of the shared-transform process (see module docstring)."""
    mu, sigma, p = stats.mu, stats.sigma, stats.probs
    mean_mu = p @ mu                                  # E_k[mu_ki]
    cross = (mu.T * p) @ mu                           # E_k[mu_ki * mu_kj]
    cov = cross - np.outer(mean_mu, mean_mu)
    diag = p @ (sigma**2 + mu**2) - mean_mu**2
    np.fill_diagonal(cov, diag)
    return cov


def iid_analytic_autocovariance(stats: TransformStats) -> np.ndarray:
    """Auto-covariance when each stage resamples its transform independently.

    Stages decouple, so off-diagonals vanish; the diagonal is the full
    marginal variance of the mixture (identical to the shared-kind diagonal).
    """
    return np.diag(np.diag(analytic_autocovariance(stats)))


def _sample_component_indices(rng: RngStream, probs: np.ndarray, size) -> np.ndarray:
    cum = np.cumsum(probs)
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return np.minimum(idx, len(probs) - 1)


def sample_stage_outputs(
    kind: str, stats: TransformStats, n: int, rng: RngStream
) -> np.ndarray:
    """n trials of the scalar surrogate process; returns an (n, S) matrix.

    ``kind='layermix'`` draws the transform index once per trial and reuses it
    at every stage; ``kind='iid'`` redraws it per (trial, stage).
    """
    if n < 1:
        raise ParameterError(f"need n >= 1 trials, got {n}")
    s = stats.n_stages
    if kind == PIPELINE_SHARED:
        ks = _sample_component_indices(rng, stats.probs, n)[:, np.newaxis]
        ks = np.broadcast_to(ks, (n, s))
    elif kind == PIPELINE_IID:
        ks = _sample_component_indices(rng, stats.probs, (n, s))
    else:
        raise ParameterError(f"pipeline kind must be 'layermix' or 'iid', got {kind!r}")
    stage_idx = np.broadcast_to(np.arange(s), (n, s))
    noise = rng.normal(size=(n, s))
    return stats.mu[ks, stage_idx] + stats.sigma[ks, stage_idx] * noise


def empirical_autocovariance(
    kind: str, stats: TransformStats, n: int, rng: RngStream
) -> np.ndarray:
    """Unbiased sample auto-covariance over n surrogate trials."""
    if n < 2:
        raise ParameterError(f"need n >= 2 samples for a covariance, got {n}")
    x = sample_stage_outputs(kind, stats, n, rng)
    return np.atleast_2d(np.cov(x, rowvar=False, ddof=1))


@dataclass(frozen=True)
class CovarianceReport:
    analytic: np.ndarray
    empirical: np.ndarray
    max_abs_deviation: float
    n_samples: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "analytic": np.asarray(self.analytic).tolist(),
                "empirical": np.asarray(self.empirical).tolist(),
                "max_abs_deviation": self.max_abs_deviation,
                "n_samples": self.n_samples,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CovarianceReport":
        obj = json.loads(text)
        return cls(
            analytic=np.asarray(obj["analytic"], dtype=np.float64),
            empirical=np.asarray(obj["empirical"], dtype=np.float64),
            max_abs_deviation=float(obj["max_abs_deviation"]),
            n_samples=int(obj["n_samples"]),
        )


def compare_covariances(
    kind: str, stats: TransformStats, n: int, rng: RngStream
) -> CovarianceReport:
    """Analytic-vs-empirical report for the requested pipeline structure."""
    if kind == PIPELINE_SHARED:
        analytic = analytic_autocovariance(stats)
    elif kind == PIPELINE_IID:
        analytic = iid_analytic_autocovariance(stats)
    else:
        raise ParameterError(f"pipeline kind must be 'layermix' or 'iid', got {kind!r}")
    empirical = empirical_autocovariance(kind, stats, n, rng)
    dev = float(np.max(np.abs(empirical - analytic)))
    return CovarianceReport(analytic, empirical, dev, n)


def estimate_transform_stats(
    desc: TransformDescriptor,
    magnitude: int,
    img: np.ndarray,
    n: int,
    rng: RngStream,
    statistic=None,
) -> tuple[float, float]:
    """Measure (mu, sigma) of an image statistic under repeated applications.

    Bridges real transforms to the scalar theory: the statistic (default mean
    intensity) of ``desc`` applied to ``img`` is sampled n times.  Stages are
    exchangeable for a fixed transform, so one (mu, sigma) pair serves every
    stage index.
    """
    if n < 100:
        raise ParameterError(f"need n >= 100 applications, got {n}")
    if statistic is None:
        statistic = lambda im: float(im.mean())
    vals = np.array([statistic(apply_transform(img, desc, magnitude, rng)) for _ in range(n)])
    return float(vals.mean()), float(vals.std(ddof=1))
