"""Model-free robustness metrics on synthetic prediction logs.

Every metric here consumes plain prediction records (label, ranked classes,
confidence, plus grid/sequence tags), so any classifier's eval dump can be
scored after the fact.  The numbers below are small enough to verify by hand.
"""

import os
import random

import layermix as lm

OUT = os.path.join(os.path.dirname(__file__), "_out")
os.makedirs(OUT, exist_ok=True)


def rec(i, label, ranked, conf, **extra):
    return lm.PredictionRecord(f"s{i}", label, tuple(ranked), conf, **extra)


# --- corruption-error grid ---------------------------------------------------
# 2 corruptions x 2 severities, 4 records per cell, exactly one wrong per cell.

grid = []
i = 0
for corruption in ("fog", "blur"):
    for severity in (1, 2):
        for k in range(4):
            label = 3
            ranked = (3, 1, 0, 2) if k > 0 else (1, 3, 0, 2)  # k=0 misses
            grid.append(rec(i, label, ranked, 0.9, corruption=corruption, severity=severity))
            i += 1

print(f"mCE, unnormalized: {lm.mean_corruption_error(grid):.4f}   (1 miss in 4 per cell)")

# A baseline with 2 misses per cell halves the ratio for every corruption.
baseline = []
for idx, r in enumerate(grid):
    wrong = idx % 4 < 2  # first 2 of each cell of 4
    ranked = (1, 3, 0, 2) if wrong else (3, 1, 0, 2)
    baseline.append(rec("b" + r.sample_id, r.label, ranked, 0.9, corruption=r.corruption, severity=r.severity))
print(f"mCE vs baseline:   {lm.mean_corruption_error(grid, baseline):.4f}")

# --- prediction flips along sequences -----------------------------------------

def seq(sid, tops, start=0):
    out = []
    for f, top in enumerate(tops):
        ranked = (top,) + tuple(c for c in range(6) if c != top)
        out.append(rec(f"{sid}f{f}", 0, ranked, 0.8, sequence_id=sid, frame=start + f))
    return out

frames = seq("walk", [0, 0, 1, 1, 1]) + seq("pan", [2, 2, 2])
print(f"\nmFP temporal: {lm.mean_flip_probability(frames, 'temporal'):.4f}   (1 flip / 6 adjacent pairs)")
print(f"mFP noise:    {lm.mean_flip_probability(frames, 'noise'):.4f}   (vs frame 0: 3 of 6 later frames differ)")

# Top-5 churn: swapping the two leaders moves each across one boundary.
stable, swapped = seq("a", [0, 0]), seq("a", [0, 1])
print(f"mT5D stable:  {lm.mean_top5_distance(stable):.4f}")
print(f"mT5D swapped: {lm.mean_top5_distance(swapped):.4f}")

# --- calibration ---------------------------------------------------------------
# Simulate a classifier whose confidence is honest: correct w.p. confidence.

py = random.Random(99)
calibrated = []
for i in range(20_000):
    conf = py.uniform(0.2, 1.0)
    hit = py.random() < conf
    calibrated.append(rec(i, 0, (0, 1) if hit else (1, 0), conf))
print(f"\nRMS calibration error, honest confidences: {lm.rms_calibration_error(calibrated, bins=15):.4f}")

overconfident = [rec(f"o{i}", r.label, r.ranked_classes, min(1.0, r.confidence + 0.25))
                 for i, r in enumerate(calibrated)]
print(f"RMS calibration error, +0.25 confidence:   {lm.rms_calibration_error(overconfident, bins=15):.4f}")

# --- consistency across three augmented views ----------------------------------

p = [0.7, 0.2, 0.1]
q = [0.6, 0.3, 0.1]
r = [0.2, 0.2, 0.6]
print(f"\nJSD(p, p, p) = {lm.jsd_consistency(p, p, p):.4f}")
print(f"JSD(p, q, r) = {lm.jsd_consistency(p, q, r):.4f}   (0 <= JSD <= ln 3 ~ 1.0986)")

# --- logs round-trip through JSONL ----------------------------------------------

log_path = os.path.join(OUT, "demo_log.jsonl")
lm.write_log(log_path, grid + frames)
back = lm.read_log(log_path)
print(f"\nwrote {len(grid + frames)} records to {log_path}, read back {len(back)}, equal: {back == grid + frames}")
