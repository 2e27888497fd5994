"""Offline VGG-19 feature extraction into TSSF fixture bundles."""

from .extract import (
    CANONICAL_LAYERS,
    VGG_CHANNELS,
    ExtractionSpec,
    extract_features,
    layer_activations,
    load_encoder,
    preprocess,
)
from .tssf_io import write_manifest, write_tssf

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_LAYERS",
    "ExtractionSpec",
    "VGG_CHANNELS",
    "extract_features",
    "layer_activations",
    "load_encoder",
    "preprocess",
    "write_manifest",
    "write_tssf",
]
