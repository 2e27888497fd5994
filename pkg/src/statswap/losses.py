"""Forward evaluation of the five training losses and the weighted total.

All norms are Euclidean norms of the flattened difference, with no
element-count averaging, so loss magnitudes scale with tensor size.
Statistics entering the style losses use epsilon 0 (no division happens).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FeatureMap, _stats_2d, channel_stats, extract_patches, mvn_normalize
from .errors import DimensionError, EngineError
from .transform import TssatConfig, match_patches

__all__ = [
    "CANONICAL_LAYERS",
    "CONTENT_LAYERS",
    "LayerFeatures",
    "AttentionMap",
    "LossWeights",
    "LossReport",
    "content_loss",
    "attention_map",
    "attention_content_loss",
    "style_loss",
    "patch_style_loss",
    "identity_loss",
    "total_loss",
]

CANONICAL_LAYERS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1", "relu5_1")
CONTENT_LAYERS = ("relu4_1", "relu5_1")

# Normalisation guard inside the attention map. Vanishing against any
# non-zero float32 variance (so per-channel affine invariance holds to well
# below 1e-5), it sends constant channels to zero instead of failing;
# inactive relu channels are routine in real feature maps.
_NORM_GUARD_EPS = 1e-30


class LayerFeatures:
    """Feature maps of one image at a fixed subset of the canonical layers."""

    __slots__ = ("_maps",)

    def __init__(self, entries) -> None:
        items = list(entries.items()) if isinstance(entries, dict) else list(entries)
        if not items:
            raise EngineError("layer features must contain at least one layer")
        names = [name for name, _ in items]
        if len(set(names)) != len(names):
            raise EngineError(f"duplicate layer names: {names}")
        unknown = [n for n in names if n not in CANONICAL_LAYERS]
        if unknown:
            raise EngineError(f"unknown layer names: {unknown}")
        by_name = dict(items)
        self._maps = {
            name: by_name[name] for name in CANONICAL_LAYERS if name in by_name
        }

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._maps)

    def get(self, name: str) -> FeatureMap:
        if name not in self._maps:
            raise EngineError(f"missing layer {name!r}; have {list(self._maps)}")
        return self._maps[name]

    def __iter__(self):
        return iter(self._maps.items())

    def __len__(self) -> int:
        return len(self._maps)


@dataclass(frozen=True)
class LossWeights:
    """Balancing weights for the loss terms plus the attention temperature."""

    lambda1: float = 5.0
    lambda2: float = 50000.0
    lambda3: float = 6.0
    lambda4: float = 0.5
    lambda5: float = 1.0
    lambda_id1: float = 50.0
    lambda_id2: float = 1.0
    tau: float = 100.0

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "lambda5", "lambda_id1", "lambda_id2"):
            if getattr(self, name) < 0:
                raise EngineError(f"{name} must be non-negative")
        if self.tau <= 0:
            raise EngineError(f"tau must be positive, got {self.tau}")


@dataclass(frozen=True)
class AttentionMap:
    """Row-stochastic self-similarity map with zero diagonal."""

    size: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.size, self.size):
            raise DimensionError(f"attention matrix must be {self.size}x{self.size}")
        if np.any(np.diagonal(self.matrix) != 0.0):
            raise EngineError("attention diagonal must be exactly zero")
        sums = self.matrix.sum(axis=1, dtype=np.float64)
        if np.max(np.abs(sums - 1.0)) > 1e-5:
            raise EngineError("attention rows must sum to 1 within 1e-5")


@dataclass(frozen=True)
class LossReport:
    """The five loss terms, their weighted total, and the weights used."""

    l_c: float
    l_ac: float
    l_s: float
    l_ps: float
    l_identity: float
    total: float
    weights: LossWeights

    def as_dict(self) -> dict:
        return {
            "l_c": self.l_c,
            "l_ac": self.l_ac,
            "l_s": self.l_s,
            "l_ps": self.l_ps,
            "l_identity": self.l_identity,
            "total": self.total,
            "weights": {
                "lambda1": self.weights.lambda1,
                "lambda2": self.weights.lambda2,
                "lambda3": self.weights.lambda3,
                "lambda4": self.weights.lambda4,
                "lambda5": self.weights.lambda5,
                "lambda_id1": self.weights.lambda_id1,
                "lambda_id2": self.weights.lambda_id2,
                "tau": self.weights.tau,
            },
        }


def _diff_norm(a: FeatureMap, b: FeatureMap) -> float:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    return float(np.linalg.norm(diff.reshape(-1)))


def content_loss(content: LayerFeatures, stylized: LayerFeatures, layers=CONTENT_LAYERS) -> float:
    """Sum over layers of the Euclidean norm of the feature difference."""
    return float(sum(_diff_norm(content.get(n), stylized.get(n)) for n in layers))


def attention_map(fmap: FeatureMap, tau: float = 100.0) -> AttentionMap:
    """Row softmax of the temperature-scaled self-similarity of normalised
    features, with the diagonal excluded from the softmax support.

    Normalisation is per channel over spatial positions, so the result is
    invariant to per-channel affine transforms of the input; constant
    channels normalise to zero and contribute nothing to the similarities.
    """
    if tau <= 0:
        raise EngineError(f"tau must be positive, got {tau}")
    n = fmap.height * fmap.width
    if n < 2:
        raise EngineError("attention needs at least 2 spatial positions")
    z = mvn_normalize(fmap, _NORM_GUARD_EPS).data.reshape(fmap.channels, n).astype(np.float64)
    sim = (z.T @ z) / tau
    np.fill_diagonal(sim, -np.inf)
    sim -= sim.max(axis=1, keepdims=True)
    np.exp(sim, out=sim)
    np.fill_diagonal(sim, 0.0)
    sim /= sim.sum(axis=1, keepdims=True)
    return AttentionMap(n, sim.astype(np.float32))


def attention_content_loss(
    content: LayerFeatures,
    stylized: LayerFeatures,
    tau: float = 100.0,
    layers=CONTENT_LAYERS,
) -> float:
    """Sum over layers of the Frobenius distance between attention maps."""
    total = 0.0
    for name in layers:
        a = content.get(name)
        b = stylized.get(name)
        if a.shape != b.shape:
            raise DimensionError(f"shape mismatch at {name}: {a.shape} vs {b.shape}")
        diff = attention_map(a, tau).matrix.astype(np.float64) - attention_map(b, tau).matrix.astype(np.float64)
        total += float(np.linalg.norm(diff.reshape(-1)))
    return total


def style_loss(style: LayerFeatures, stylized: LayerFeatures, layers=CANONICAL_LAYERS) -> float:
    """Sum over layers of the distances between channel means and stds.

    Spatial sizes may differ per layer; channel counts must match.
    """
    total = 0.0
    for name in layers:
        a = style.get(name)
        b = stylized.get(name)
        if a.channels != b.channels:
            raise DimensionError(
                f"channel mismatch at {name}: {a.channels} vs {b.channels}"
            )
        sa = channel_stats(a, 0.0)
        sb = channel_stats(b, 0.0)
        total += float(np.linalg.norm(sa.mean - sb.mean))
        total += float(np.linalg.norm(sa.std - sb.std))
    return total


def _patch_stats(patch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = patch.shape[0]
    return _stats_2d(patch.reshape(c, -1), 0.0)


def patch_style_loss(
    stylized_r41: FeatureMap,
    style_r41: FeatureMap,
    cfg: TssatConfig = TssatConfig(),
) -> float:
    """Statistics distance between each stylized patch and its best-matching
    style patch, using the same patch size and strides as the swap stage.
    """
    stylized_ps = extract_patches(stylized_r41, cfg.patch_size, cfg.content_stride)
    style_ps = extract_patches(style_r41, cfg.patch_size, cfg.style_stride)
    match = match_patches(stylized_ps, style_ps, matcher=cfg.matcher)
    total = 0.0
    for i in range(len(stylized_ps)):
        mean_i, std_i = _patch_stats(stylized_ps.patch(i))
        mean_j, std_j = _patch_stats(style_ps.patch(int(match.assignment[i])))
        total += float(np.linalg.norm(mean_i - mean_j))
        total += float(np.linalg.norm(std_i - std_j))
    return total


def identity_loss(
    image_c: FeatureMap,
    image_cc: FeatureMap,
    image_s: FeatureMap,
    image_ss: FeatureMap,
    feats_c: LayerFeatures,
    feats_cc: LayerFeatures,
    feats_s: LayerFeatures,
    feats_ss: LayerFeatures,
    weights: LossWeights = LossWeights(),
    layers=CANONICAL_LAYERS,
) -> float:
    """Reconstruction penalty when content and style inputs coincide.

    ``image_cc``/``image_ss`` are the reconstructions produced from two
    identical content/style inputs; the pixel term is weighted by
    ``lambda_id1`` and the feature term by ``lambda_id2``.
    """
    pixel = _diff_norm(image_c, image_cc) + _diff_norm(image_s, image_ss)
    feat = 0.0
    for name in layers:
        feat += _diff_norm(feats_c.get(name), feats_cc.get(name))
        feat += _diff_norm(feats_s.get(name), feats_ss.get(name))
    return float(weights.lambda_id1 * pixel + weights.lambda_id2 * feat)


def total_loss(
    l_c: float,
    l_ac: float,
    l_s: float,
    l_ps: float,
    l_identity: float,
    weights: LossWeights = LossWeights(),
) -> LossReport:
    """Weighted sum of the five loss terms."""
    parts = {"l_c": l_c, "l_ac": l_ac, "l_s": l_s, "l_ps": l_ps, "l_identity": l_identity}
    for name, value in parts.items():
        if not np.isfinite(value):
            raise EngineError(f"{name} is not finite: {value}")
        if value < 0:
            raise EngineError(f"{name} must be non-negative, got {value}")
    total = (
        weights.lambda1 * l_c
        + weights.lambda2 * l_ac
        + weights.lambda3 * l_s
        + weights.lambda4 * l_ps
        + weights.lambda5 * l_identity
    )
    return LossReport(l_c, l_ac, l_s, l_ps, l_identity, float(total), weights)
