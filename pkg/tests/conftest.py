import numpy as np
import pytest

from setkernels.rff import EmbeddedSample


def random_embedded(rng, n, dim, fingerprint="fp", uniform=False):
    E = rng.normal(size=(n, dim))
    w = np.full(n, 1.0 / n) if uniform else rng.random(n) + 0.1
    return EmbeddedSample(E, w / w.sum(), fingerprint)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
