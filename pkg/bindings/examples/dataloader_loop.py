"""Plugging the augmenter into a training data-loading loop.

The pattern: build ONE BoundAugmenter at startup, hand it to every loader
worker, and derive each sample's stream id from (epoch, dataset index).  The
augmenter is immutable, so workers share it freely, and the keyed streams make
the produced tensors independent of worker count and scheduling order.
"""

import hashlib
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

import layermix as lm
from layermix_bindings import make_augmenter


class AugmentedDataset:
    """Map-style dataset: base image in, augmented training tensor out."""

    def __init__(self, images, labels, augmenter):
        self.images = images
        self.labels = labels
        self.augmenter = augmenter
        self.epoch = 0  # bump between passes so every epoch draws fresh views

    def __len__(self):
        return len(self.images)

    def __getitem__(self, idx):
        stream_id = self.epoch * len(self) + idx
        return self.augmenter.augment_array(self.images[idx], stream_id), self.labels[idx]


def run_epoch(dataset, workers):
    """Stand-in for a multi-worker loader: fetch all items, digest the batch."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        items = list(pool.map(dataset.__getitem__, range(len(dataset))))
    h = hashlib.sha256()
    for tensor, label in items:
        h.update(tensor.tobytes())
        h.update(bytes([label]))
    return h.hexdigest()[:16]


with tempfile.TemporaryDirectory() as scratch:
    # Any directory of images works as a bank; use procedural textures here.
    rng = np.random.default_rng(0)
    for i in range(4):
        ys, xs = np.meshgrid(np.linspace(0, 5, 48), np.linspace(0, 5, 48), indexing="ij")
        tex = 0.5 + 0.5 * np.sin(xs * ys / (i + 1) + i)
        lm.save_image(f"{scratch}/tex{i}.png", np.stack([tex] * 3, axis=2))

    augmenter = make_augmenter(scratch, magnitude=8, beta=3.0, seed=1234)
    print(f"augmenter: {augmenter}\n")

    images = [rng.random((32, 32, 3)) for _ in range(24)]
    labels = list(rng.integers(0, 10, size=24))
    dataset = AugmentedDataset(images, labels, augmenter)

    for epoch in range(2):
        dataset.epoch = epoch
        one = run_epoch(dataset, workers=1)
        four = run_epoch(dataset, workers=4)
        print(f"epoch {epoch}: 1 worker -> {one}")
        print(f"epoch {epoch}: 4 workers -> {four}   identical: {one == four}")

    dataset.epoch = 0
    print(f"\nepoch 0 replayed -> {run_epoch(dataset, workers=2)} (matches the first pass)")
