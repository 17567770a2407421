import numpy as np
import pytest

from wilddistort import ImageBuffer


def synth_image(seed: int, width: int = 128, height: int = 128) -> ImageBuffer:
    """Deterministic natural-ish test image: low-frequency sinusoid mixture
    per channel plus mild gaussian grain, stretched to full range."""
    g = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.zeros((height, width, 3))
    for c in range(3):
        acc = np.zeros((height, width))
        for _ in range(4):
            fx, fy = g.uniform(0.5, 4.0, 2)
            ph = g.uniform(0.0, 2.0 * np.pi, 2)
            acc += g.uniform(0.3, 1.0) * np.sin(2 * np.pi * fx * xx / width + ph[0]) \
                * np.sin(2 * np.pi * fy * yy / height + ph[1])
        acc += g.normal(0.0, 0.15, (height, width))
        acc = (acc - acc.min()) / (acc.max() - acc.min())
        img[:, :, c] = acc * 255.0
    return ImageBuffer(np.floor(img + 0.5).astype(np.uint8))


@pytest.fixture(scope="session")
def small_corpus():
    """20 fixed 128x128 images used by statistical distortion tests."""
    return [synth_image(seed) for seed in range(20)]


@pytest.fixture()
def natural_image():
    return synth_image(1234, 160, 120)
