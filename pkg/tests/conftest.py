import numpy as np
import pytest

import layermix as lm
from helpers import gradient_image, noise_image


@pytest.fixture(scope="session")
def bank_dir(tmp_path_factory):
    """Directory of eight deterministic mixing pictures (mixed sizes)."""
    root = tmp_path_factory.mktemp("bank")
    stream = lm.RngStream(2024, 0)
    sizes = [(40, 36), (36, 40), (48, 48), (32, 44), (44, 32), (40, 40), (52, 36), (36, 52)]
    for i, (h, w) in enumerate(sizes):
        noise = stream.random((h, w, 3))
        img = np.clip(0.5 * noise + 0.5 * gradient_image(h, w), 0.0, 1.0)
        lm.save_image(root / f"fractal_{i}.png", img)
    return root


@pytest.fixture(scope="session")
def bank(bank_dir):
    return lm.load_bank(bank_dir, grayscale=True)


@pytest.fixture(scope="session")
def color_bank(bank_dir):
    return lm.load_bank(bank_dir, grayscale=False)


@pytest.fixture()
def small_img():
    return noise_image(12, 10, seed=7)


@pytest.fixture()
def smooth_img():
    return gradient_image(48, 48)


@pytest.fixture()
def cfg():
    return lm.PipelineConfig(seed=1234)
