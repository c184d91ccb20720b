"""Model-free robustness and calibration metrics over prediction logs.

Inputs are PredictionRecord rows (usually parsed from a JSON-lines log):
top-1/ranked predictions tagged with corruption x severity coordinates or
perturbation-sequence coordinates.  No model is involved — every metric is a
pure fold over the records.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import IncompleteGridError, LogSchemaError, ParameterError

LOG_FIELDS = (
    "sample_id",
    "label",
    "ranked_classes",
    "confidence",
    "corruption",
    "severity",
    "sequence_id",
    "frame",
)
_OPTIONAL_FIELDS = ("corruption", "severity", "sequence_id", "frame")


@dataclass(frozen=True)
class PredictionRecord:
    sample_id: str
    label: int
    ranked_classes: tuple[int, ...]
    confidence: float
    corruption: Optional[str] = None
    severity: Optional[int] = None
    sequence_id: Optional[str] = None
    frame: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "ranked_classes", tuple(self.ranked_classes))
        if not self.ranked_classes:
            raise ParameterError("ranked_classes must be non-empty")
        if len(set(self.ranked_classes)) != len(self.ranked_classes):
            raise ParameterError(f"ranked_classes has duplicates: {self.ranked_classes}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ParameterError(f"confidence must be in [0,1], got {self.confidence}")
        if self.severity is not None and not 1 <= self.severity <= 5:
            raise ParameterError(f"severity must be in 1..5, got {self.severity}")
        if (self.sequence_id is None) != (self.frame is None):
            raise ParameterError("frame must be present iff sequence_id is present")
        if self.frame is not None and self.frame < 0:
            raise ParameterError(f"frame must be >= 0, got {self.frame}")

    @property
    def top1(self) -> int:
        return self.ranked_classes[0]

    @property
    def correct(self) -> bool:
        return self.top1 == self.label


def rank_classes(scores: Sequence[float]) -> tuple[int, ...]:
    """Class indices by descending score; ties broken by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((np.arange(len(scores)), -scores))
    return tuple(int(i) for i in order)


# ---------------------------------------------------------------------------
# JSON-lines ingestion

_FIELD_CHECKS = {
    "sample_id": lambda v: isinstance(v, str),
    "label": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "ranked_classes": lambda v: isinstance(v, list)
    and v
    and all(isinstance(x, int) and not isinstance(x, bool) for x in v),
    "confidence": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "corruption": lambda v: isinstance(v, str),
    "severity": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "sequence_id": lambda v: isinstance(v, str),
    "frame": lambda v: isinstance(v, int) and not isinstance(v, bool),
}


def record_from_dict(obj: dict, line: Optional[int] = None) -> PredictionRecord:
    if not isinstance(obj, dict):
        raise LogSchemaError(f"expected a JSON object, got {type(obj).__name__}", line)
    unknown = set(obj) - set(LOG_FIELDS)
    if unknown:
        raise LogSchemaError(f"unknown fields {sorted(unknown)}", line)
    missing = [f for f in LOG_FIELDS if f not in obj and f not in _OPTIONAL_FIELDS]
    if missing:
        raise LogSchemaError(f"missing required fields {missing}", line)
    for name, value in obj.items():
        if value is None:
            raise LogSchemaError(
                f"field {name!r} is null; optional fields must be omitted instead", line
            )
        if not _FIELD_CHECKS[name](value):
            raise LogSchemaError(f"field {name!r} has invalid value {value!r}", line)
    try:
        return PredictionRecord(
            sample_id=obj["sample_id"],
            label=obj["label"],
            ranked_classes=tuple(obj["ranked_classes"]),
            confidence=float(obj["confidence"]),
            corruption=obj.get("corruption"),
            severity=obj.get("severity"),
            sequence_id=obj.get("sequence_id"),
            frame=obj.get("frame"),
        )
    except ParameterError as exc:
        raise LogSchemaError(str(exc), line) from exc


def parse_log_lines(lines: Iterable[str]) -> list[PredictionRecord]:
    records = []
    for lineno, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise LogSchemaError(f"invalid JSON: {exc.msg}", lineno) from exc
        records.append(record_from_dict(obj, lineno))
    return records


def read_log(path) -> list[PredictionRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_log_lines(fh)


def record_to_dict(rec: PredictionRecord) -> dict:
    out = {
        "sample_id": rec.sample_id,
        "label": rec.label,
        "ranked_classes": list(rec.ranked_classes),
        "confidence": rec.confidence,
    }
    for name in _OPTIONAL_FIELDS:
        value = getattr(rec, name)
        if value is not None:
            out[name] = value
    return out


def write_log(path, records: Iterable[PredictionRecord]):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_dict(rec)) + "\n")


# ---------------------------------------------------------------------------
# corruption error


def _corruption_grid(records: Sequence[PredictionRecord], who: str):
    cells: dict[tuple[str, int], list[bool]] = {}
    for rec in records:
        if rec.corruption is None or rec.severity is None:
            raise ParameterError(
                f"{who} record {rec.sample_id!r} lacks corruption/severity tags"
            )
        cells.setdefault((rec.corruption, rec.severity), []).append(rec.correct)
    corruptions = sorted({c for c, _ in cells})
    severities = sorted({s for _, s in cells})
    missing = [
        (c, s) for c in corruptions for s in severities if (c, s) not in cells
    ]
    if missing:
        raise IncompleteGridError(f"{who} grid is missing cells: {missing}")
    errors = {
        key: 1.0 - (sum(flags) / len(flags)) for key, flags in cells.items()
    }
    return errors, corruptions, severities


def mean_corruption_error(
    records: Sequence[PredictionRecord],
    baseline: Optional[Sequence[PredictionRecord]] = None,
) -> float:
    """Top-1 error averaged over the corruption x severity grid.

    With a baseline log, each corruption contributes the ratio of summed
    errors (method over baseline) and those ratios are averaged instead.
    """
    if not records:
        raise ParameterError("no records")
    errors, corruptions, severities = _corruption_grid(records, "log")
    if baseline is None:
        return float(
            sum(errors[(c, s)] for c in corruptions for s in severities)
            / (len(corruptions) * len(severities))
        )
    base_errors, base_corr, base_sev = _corruption_grid(baseline, "baseline")
    if base_corr != corruptions or base_sev != severities:
        raise IncompleteGridError(
            "baseline grid does not cover the same corruption x severity grid"
        )
    ratios = []
    for c in corruptions:
        num = sum(errors[(c, s)] for s in severities)
        den = sum(base_errors[(c, s)] for s in severities)
        if den == 0:
            raise ParameterError(f"baseline error is zero for corruption {c!r}")
        ratios.append(num / den)
    return float(sum(ratios) / len(ratios))


# ---------------------------------------------------------------------------
# perturbation-sequence metrics


class FlipMode(Enum):
    TEMPORAL = "temporal"        # adjacent frames compared
    NOISE_SEQUENCE = "noise"     # every later frame compared to the first


def _sequences(records: Sequence[PredictionRecord]) -> dict[str, list[PredictionRecord]]:
    groups: dict[str, list[PredictionRecord]] = {}
    for rec in records:
        if rec.sequence_id is None:
            raise ParameterError(f"record {rec.sample_id!r} lacks a sequence_id")
        groups.setdefault(rec.sequence_id, []).append(rec)
    for sid, seq in groups.items():
        seq.sort(key=lambda r: r.frame)
        frames = [r.frame for r in seq]
        if frames != list(range(len(seq))):
            raise ParameterError(
                f"sequence {sid!r} frames must be contiguous from 0, got {frames}"
            )
        if len(seq) < 2:
            raise ParameterError(f"sequence {sid!r} is shorter than 2 frames")
    return groups


def mean_flip_probability(
    records: Sequence[PredictionRecord], mode: FlipMode = FlipMode.TEMPORAL
) -> float:
    """Probability that a frame's top-1 differs from its reference frame.

    Temporal mode references the previous frame; noise mode references the
    first frame.  Pooled over all comparisons of all sequences.
    """
    if isinstance(mode, str):
        mode = FlipMode(mode)
    if not records:
        raise ParameterError("no sequence records in log")
    flips = 0
    total = 0
    for seq in _sequences(records).values():
        tops = [r.top1 for r in seq]
        if mode is FlipMode.TEMPORAL:
            flips += sum(1 for a, b in zip(tops, tops[1:]) if a != b)
        else:
            flips += sum(1 for t in tops[1:] if t != tops[0])
        total += len(tops) - 1
    return flips / total


def top5_displacement(
    prev: Sequence[int], curr: Sequence[int]
) -> int:
    """Rank-displacement distance between two class rankings.

    With tau(x), tau(x') the rank->class permutations and
    sigma = tau(x)^{-1} tau(x'), counts, for each of the five top ranks i of
    x', the rank boundaries j in {2..6} crossed between i and sigma(i).
    """
    if len(prev) < 5 or len(curr) < 5:
        raise ParameterError("rankings must contain at least 5 classes")
    pos_prev = {cls: idx + 1 for idx, cls in enumerate(prev)}
    d = 0
    for i in range(1, 6):
        cls = curr[i - 1]
        if cls not in pos_prev:
            raise ParameterError(
                f"class {cls!r} missing from the paired ranking (different universes)"
            )
        sigma_i = pos_prev[cls]
        lo = min(i, sigma_i) + 1
        hi = max(i, sigma_i)
        # indicator 1(1 <= j-1 <= 5) keeps j in {2..6}
        d += max(0, min(hi, 6) - max(lo, 2) + 1)
    return d


def mean_top5_distance(records: Sequence[PredictionRecord]) -> float:
    """Average per-sequence mean of adjacent-pair top-5 displacement."""
    per_sequence = []
    for seq in _sequences(records).values():
        dists = [
            top5_displacement(a.ranked_classes, b.ranked_classes)
            for a, b in zip(seq, seq[1:])
        ]
        per_sequence.append(sum(dists) / len(dists))
    if not per_sequence:
        raise ParameterError("no sequences in log")
    return float(sum(per_sequence) / len(per_sequence))


# ---------------------------------------------------------------------------
# calibration


def rms_calibration_error(records: Sequence[PredictionRecord], bins: int = 15) -> float:
    """RMS gap between per-bin accuracy and per-bin mean confidence.

    Adaptive (equal-mass) binning: records are stable-sorted by confidence
    alone and split into ``bins`` contiguous groups whose sizes differ by at
    most one; each bin is weighted by its mass.
    """
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    n = len(records)
    if n < bins:
        raise ParameterError(f"need at least {bins} records, got {n}")
    conf = np.array([r.confidence for r in records], dtype=np.float64)
    correct = np.array([r.correct for r in records], dtype=np.float64)
    order = np.argsort(conf, kind="stable")
    conf = conf[order]
    correct = correct[order]
    edges = [(k * n) // bins for k in range(bins + 1)]
    total = 0.0
    for k in range(bins):
        sl = slice(edges[k], edges[k + 1])
        gap = correct[sl].mean() - conf[sl].mean()
        total += (edges[k + 1] - edges[k]) / n * gap * gap
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# prediction-consistency divergence


def _require_distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError(f"{name} must be a non-empty 1-D probability vector")
    if np.any(p < 0):
        raise ParameterError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > 1e-6:
        raise ParameterError(f"{name} must sum to 1 within 1e-6, got {p.sum()!r}")
    return p


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


def jsd_consistency(p, q, r) -> float:
    """Jensen-Shannon divergence (nats) among three predictive distributions."""
    p = _require_distribution(p, "p")
    q = _require_distribution(q, "q")
    r = _require_distribution(r, "r")
    if not (p.shape == q.shape == r.shape):
        raise ParameterError("distributions must share one length")
    m = (p + q + r) / 3.0
    return max(0.0, (_kl(p, m) + _kl(q, m) + _kl(r, m)) / 3.0)
