"""VGG-19 feature extraction for TSSF fixture bundles.

Images are resized so the smallest side is 512, centre-cropped to 256
(centre rather than random crop, so fixtures are reproducible), normalised
with the standard ImageNet statistics, and pushed through a frozen VGG-19
in eval mode. One TSSF file per requested relu*_1 layer is written next to
a bundle manifest.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import transforms
from torchvision.models import vgg19

from .tssf_io import write_manifest, write_tssf

CANONICAL_LAYERS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")

# indices of the relu*_1 activations inside torchvision's vgg19().features
_LAYER_INDEX = {
    "relu1_1": 1,
    "relu2_1": 6,
    "relu3_1": 11,
    "relu4_1": 20,
    "relu5_1": 29,
}

VGG_CHANNELS = {
    "relu1_1": 64,
    "relu2_1": 128,
    "relu3_1": 256,
    "relu4_1": 512,
    "relu5_1": 512,
}

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)

_PREPROCESS_NOTE = (
    "preprocessing: smallest side resized to {resize}, centre crop {crop}, "
    "ImageNet mean/std normalisation"
)


@dataclass(frozen=True)
class ExtractionSpec:
    """What to extract from one image and where to put it."""

    image_path: str
    out_dir: str
    layers: tuple[str, ...] = CANONICAL_LAYERS
    resize_to: int = 512
    crop_to: int = 256
    weights_path: str | None = None
    manifest_name: str = "manifest.txt"

    def __post_init__(self) -> None:
        unknown = [n for n in self.layers if n not in CANONICAL_LAYERS]
        if unknown:
            raise ValueError(f"unknown layers {unknown}; expected subset of {CANONICAL_LAYERS}")
        if not self.layers:
            raise ValueError("at least one layer is required")
        if self.crop_to > self.resize_to:
            raise ValueError("crop size cannot exceed the resized smallest side")


def load_encoder(weights_path: str | None = None) -> torch.nn.Module:
    """A frozen VGG-19 feature stack, pretrained from the model zoo by
    default, or loaded from a local state dict when ``weights_path`` is set.
    """
    if weights_path is None:
        from torchvision.models import VGG19_Weights

        model = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
    else:
        model = vgg19(weights=None)
        state = torch.load(weights_path, map_location="cpu", weights_only=True)
        if any(key.startswith(("features.", "classifier.")) for key in state):
            model.load_state_dict(state)
        else:
            # state dict of the convolutional stack alone
            model.features.load_state_dict(state)
    features = model.features.eval()
    for p in features.parameters():
        p.requires_grad_(False)
    return features


def preprocess(image: Image.Image, resize_to: int = 512, crop_to: int = 256) -> torch.Tensor:
    pipeline = transforms.Compose(
        [
            transforms.Resize(resize_to),
            transforms.CenterCrop(crop_to),
            transforms.ToTensor(),
            transforms.Normalize(_IMAGENET_MEAN, _IMAGENET_STD),
        ]
    )
    return pipeline(image.convert("RGB")).unsqueeze(0)


def layer_activations(features: torch.nn.Module, batch: torch.Tensor, layers) -> dict[str, np.ndarray]:
    """Run the feature stack once, collecting the requested activations."""
    wanted = {_LAYER_INDEX[name]: name for name in layers}
    out: dict[str, np.ndarray] = {}
    x = batch
    last = max(wanted)
    with torch.no_grad():
        for idx, module in enumerate(features):
            x = module(x)
            if idx in wanted:
                out[wanted[idx]] = x[0].numpy().astype(np.float32, copy=True)
            if idx == last:
                break
    return out


def extract_features(spec: ExtractionSpec, features: torch.nn.Module | None = None) -> Path:
    """Write one TSSF per requested layer plus a manifest; returns its path."""
    if features is None:
        features = load_encoder(spec.weights_path)
    image = Image.open(spec.image_path)
    batch = preprocess(image, spec.resize_to, spec.crop_to)
    activations = layer_activations(features, batch, spec.layers)
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: dict[str, str] = {}
    for name in CANONICAL_LAYERS:
        if name not in activations:
            continue
        arr = activations[name]
        if arr.shape[0] != VGG_CHANNELS[name]:
            raise RuntimeError(
                f"{name} produced {arr.shape[0]} channels, expected {VGG_CHANNELS[name]}"
            )
        fname = f"{name}.tssf"
        write_tssf(arr, out_dir / fname)
        entries[name] = fname
    note = _PREPROCESS_NOTE.format(resize=spec.resize_to, crop=spec.crop_to)
    return write_manifest(entries, out_dir / spec.manifest_name, comment=note)
