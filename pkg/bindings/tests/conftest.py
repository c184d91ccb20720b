import numpy as np
import pytest

import layermix as lm


def _texture(h, w, k):
    ys, xs = np.meshgrid(np.linspace(0, 3, h), np.linspace(0, 3, w), indexing="ij")
    v = 0.5 + 0.5 * np.sin((k + 1) * xs + ys * ys - k)
    return np.stack([v, np.roll(v, k + 1, axis=1), v[::-1]], axis=2)


@pytest.fixture(scope="session")
def bank_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("bindings_bank")
    for i in range(5):
        lm.save_image(str(root / f"tex{i}.png"), _texture(40 + 2 * i, 44, i))
    return str(root)


@pytest.fixture(scope="session")
def golden_corpus():
    """64 fixed images; mixed sizes, every fourth one single-channel."""
    rng = np.random.default_rng(20240817)
    shapes = [(24, 20, 3), (16, 28, 3), (32, 32, 3), (20, 20, 1)]
    return [rng.random(shapes[i % 4]) for i in range(64)]
