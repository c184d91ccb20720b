"""Deterministic builders for test images and prediction logs."""

from __future__ import annotations

import random

import numpy as np

from layermix import PredictionRecord, RngStream


def gradient_image(h: int, w: int) -> np.ndarray:
    """Smooth three-channel gradient; friendly to interpolation checks."""
    ys, xs = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    img = np.stack([0.15 + 0.7 * xs, 0.25 + 0.5 * ys, 0.4 + 0.4 * xs * ys], axis=2)
    return np.clip(img, 0.0, 1.0)


def noise_image(h: int, w: int, seed: int = 0) -> np.ndarray:
    return RngStream(seed, 1000).random((h, w, 3))


def make_record(i: int, label: int, ranked, confidence: float, **optional) -> PredictionRecord:
    return PredictionRecord(
        sample_id=f"s{i}",
        label=label,
        ranked_classes=tuple(ranked),
        confidence=confidence,
        **optional,
    )


def sequence_records(sequence_id: str, top1_labels, n_classes: int = 6, start_index: int = 0):
    """One sequence whose frame f predicts top1_labels[f]; labels are 0."""
    records = []
    for frame, top in enumerate(top1_labels):
        ranked = [top] + [c for c in range(n_classes) if c != top]
        records.append(
            make_record(
                start_index + frame,
                0,
                ranked,
                0.9,
                sequence_id=sequence_id,
                frame=frame,
            )
        )
    return records


def random_log(py_rng: random.Random, index: int):
    """One random small log exercising every metric's grouping logic.

    Returns records carrying a complete corruption grid, several ranked
    sequences, and tie-free confidences.
    """
    n_classes = py_rng.randint(6, 10)
    classes = list(range(n_classes))
    records = []
    i = 0

    corruptions = [f"corr{k}" for k in range(py_rng.randint(2, 4))]
    severities = list(range(1, py_rng.randint(2, 5) + 1))
    for corruption in corruptions:
        for severity in severities:
            for _ in range(py_rng.randint(2, 6)):
                label = py_rng.randrange(n_classes)
                ranked = classes[:]
                py_rng.shuffle(ranked)
                records.append(
                    make_record(
                        i,
                        label,
                        ranked,
                        py_rng.random(),
                        corruption=corruption,
                        severity=severity,
                    )
                )
                i += 1

    for s in range(py_rng.randint(2, 4)):
        length = py_rng.randint(2, 7)
        for frame in range(length):
            label = py_rng.randrange(n_classes)
            ranked = classes[:]
            py_rng.shuffle(ranked)
            records.append(
                make_record(
                    i,
                    label,
                    ranked,
                    py_rng.random(),
                    sequence_id=f"log{index}-seq{s}",
                    frame=frame,
                )
            )
            i += 1
    return records
