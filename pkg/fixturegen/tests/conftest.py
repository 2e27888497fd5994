import numpy as np
import pytest
import torch
from PIL import Image

from fixturegen import load_encoder


@pytest.fixture(scope="session")
def weights_file(tmp_path_factory):
    """Deterministic locally generated VGG-19 conv weights.

    The sandbox cannot reach the model zoo, so tests run the full pipeline
    on a seeded random initialisation; shapes, determinism, and the file
    contract do not depend on the weight values.
    """
    from torchvision.models import vgg19

    torch.manual_seed(0)
    path = tmp_path_factory.mktemp("weights") / "vgg19_conv.pt"
    torch.save(vgg19(weights=None).features.state_dict(), path)
    return str(path)


@pytest.fixture(scope="session")
def encoder(weights_file):
    return load_encoder(weights_file)


def _save_image(path, seed, size=(420, 320)):
    rng = np.random.default_rng(seed)
    w, h = size
    yy, xx = np.mgrid[0:h, 0:w]
    base = np.stack(
        [
            128 + 90 * np.sin(xx / 23.0) * np.cos(yy / 31.0),
            128 + 90 * np.cos(xx / 17.0 + seed),
            128 + 90 * np.sin((xx + yy) / 41.0),
        ],
        axis=2,
    )
    noise = rng.normal(0, 18, size=(h, w, 3))
    img = np.clip(base + noise, 0, 255).astype(np.uint8)
    Image.fromarray(img).save(path)
    return str(path)


@pytest.fixture(scope="session")
def content_image(tmp_path_factory):
    return _save_image(tmp_path_factory.mktemp("img") / "content.png", seed=1)


@pytest.fixture(scope="session")
def style_image(tmp_path_factory):
    return _save_image(tmp_path_factory.mktemp("img") / "style.png", seed=2)
