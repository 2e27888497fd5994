import numpy as np
import pytest

from statswap import FeatureMap


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_map(rng, channels, height, width, scale=1.0, offset=0.0):
    data = rng.standard_normal((channels, height, width)).astype(np.float32)
    return FeatureMap(data * scale + offset)
