"""Two-stage feature transform: global statistics alignment plus local swap.

The transform first re-statisticises the whole content map against the
style map (``gsa``), then cuts both maps into patches, matches every
content patch to its most cosine-similar style patch, swaps the per-channel
window statistics of each matched pair, and recombines (``lss``). ``tssat``
is the composition of the two stages.

Patch matching offers two interchangeable backends. The ``gemm`` backend
computes all raw inner products with one matrix product against the style
map and reads the per-window sums out of shifted views; the ``naive``
backend is a plain double loop. Raw scores from the fast backend carry
float32 rounding, so every candidate within a small window of the row
maximum is re-scored by a shared float64 dot before the winner is chosen.
Both backends therefore select identical indices, including on duplicated
style patches, where scores tie bit-for-bit and the smallest index wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FeatureMap,
    PatchSet,
    _scale_shift,
    channel_stats,
    extract_patches,
    recombine_patches,
)
from .errors import DimensionError, EngineError

__all__ = [
    "TssatConfig",
    "MatchAssignment",
    "gsa",
    "match_patches",
    "swap_patch_stats",
    "lss",
    "tssat",
]

MATCHERS = ("naive", "gemm")

# Candidates within this fraction of the content-patch norm below the row
# maximum are re-scored in float64; roughly 100x the float32 score error.
_REFINE_REL_TOL = 3e-4


@dataclass(frozen=True)
class TssatConfig:
    """Knobs for the two-stage transform.

    ``content_stride`` defaults to the patch size (exact tiling), and
    ``style_stride`` defaults to 1 (dense candidate bank).
    """

    patch_size: int = 5
    content_stride: int | None = None
    style_stride: int = 1
    epsilon: float = 1e-5
    matcher: str = "gemm"

    def __post_init__(self) -> None:
        if self.patch_size < 1:
            raise EngineError(f"patch size must be >= 1, got {self.patch_size}")
        if self.content_stride is None:
            object.__setattr__(self, "content_stride", self.patch_size)
        if self.content_stride < 1 or self.style_stride < 1:
            raise EngineError("strides must be >= 1")
        if self.epsilon < 0:
            raise EngineError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.matcher not in MATCHERS:
            raise EngineError(f"matcher must be one of {MATCHERS}, got {self.matcher!r}")


@dataclass(frozen=True)
class MatchAssignment:
    """For each content patch, its best style patch index and cosine score."""

    content_patch_count: int
    style_patch_count: int
    assignment: np.ndarray
    score: np.ndarray

    def __post_init__(self) -> None:
        if self.assignment.shape != (self.content_patch_count,):
            raise DimensionError("assignment length must equal the content patch count")
        if self.score.shape != (self.content_patch_count,):
            raise DimensionError("score length must equal the content patch count")
        if self.content_patch_count and (
            self.assignment.min() < 0 or self.assignment.max() >= self.style_patch_count
        ):
            raise EngineError("assignment contains out-of-range style indices")


def gsa(content: FeatureMap, style: FeatureMap, epsilon: float = 1e-5) -> FeatureMap:
    """Re-statisticise the content map so each channel matches the style map.

    Output keeps the content map's shape; per channel it equals
    ``std_s * (x - mean_c) / std_c + mean_s``.
    """
    if content.channels != style.channels:
        raise DimensionError(
            f"channel mismatch: content has {content.channels}, style has {style.channels}"
        )
    cs = channel_stats(content, epsilon)
    ss = channel_stats(style, epsilon)
    return FeatureMap(_scale_shift(content.data, cs.mean, cs.std, ss.mean, ss.std))


def swap_patch_stats(content_patch: np.ndarray, style_patch: np.ndarray, epsilon: float = 1e-5) -> np.ndarray:
    """Give the content patch the style patch's per-channel window statistics.

    A patch is just a small feature map, so this is exactly :func:`gsa`
    applied to one window pair (same channel-wise formula, same epsilon
    handling), restricted to equal shapes.
    """
    cp = FeatureMap(content_patch)
    sp = FeatureMap(style_patch)
    if cp.shape != sp.shape:
        raise DimensionError(f"patch shapes must match, got {cp.shape} vs {sp.shape}")
    return gsa(cp, sp, epsilon).data


def _style_norms(style: PatchSet) -> np.ndarray:
    """Float64 L2 norm of every style patch.

    For grid-backed sets the squared norms are window sums of the per-position
    channel energy, accumulated over window offsets in a fixed order so that
    value-identical patches get bit-identical norms.
    """
    if style.is_grid_backed:
        src = style.source.astype(np.float64)
        energy = np.einsum("chw,chw->hw", src, src)
        gh, gw = style.grid
        k, s = style.patch_size, style.stride
        sq = np.zeros((gh, gw), dtype=np.float64)
        for u in range(k):
            for v in range(k):
                sq += energy[u : u + (gh - 1) * s + 1 : s, v : v + (gw - 1) * s + 1 : s]
        return np.sqrt(sq).reshape(-1)
    pat = style.patches.astype(np.float64)
    return np.sqrt(np.einsum("nckl,nckl->n", pat, pat))


def _pair_dot(content_vec: np.ndarray, style_patch: np.ndarray) -> float:
    """Canonical float64 inner product used by both matcher backends."""
    s = np.ascontiguousarray(style_patch, dtype=np.float64).reshape(-1)
    return float(np.dot(content_vec, s))


def _content_vec(content: PatchSet, i: int) -> np.ndarray:
    # .patches is materialised by the score computation, so rows are contiguous
    return content.patches[i].astype(np.float64).reshape(-1)


def _cosine(dot: float, content_norm: float, style_norm: float) -> float:
    if content_norm == 0.0 or style_norm == 0.0:
        return 0.0
    return float(np.clip(dot / (content_norm * style_norm), -1.0, 1.0))


def _raw_scores_gemm(content: PatchSet, style: PatchSet) -> np.ndarray:
    """Float32 inner products of every (content, style) patch pair."""
    n_c = len(content)
    k = content.patch_size
    tiles = content.patches
    if style.is_grid_backed:
        # One product of all content rows against the style map, then sum the
        # per-offset planes through shifted views. Avoids materialising the
        # style patch matrix, whose copy alone grows with k*k.
        src = style.source
        c, h, w = style.source_shape
        lhs = np.ascontiguousarray(tiles.transpose(0, 2, 3, 1)).reshape(n_c * k * k, c)
        planes = (lhs @ src.reshape(c, h * w)).reshape(n_c, k, k, h, w)
        gh, gw = style.grid
        s = style.stride
        raw = np.zeros((n_c, gh, gw), dtype=np.float32)
        for u in range(k):
            for v in range(k):
                raw += planes[:, u, v, u : u + (gh - 1) * s + 1 : s, v : v + (gw - 1) * s + 1 : s]
        return raw.reshape(n_c, len(style))
    d = tiles.shape[1] * k * k
    return tiles.reshape(n_c, d) @ style.patches.reshape(len(style), d).T


def _match_gemm(content: PatchSet, style: PatchSet, norms: np.ndarray):
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = _raw_scores_gemm(content, style) / norms[None, :]
    scores[:, norms == 0.0] = -np.inf
    rowmax = scores.max(axis=1)
    n_c = len(content)
    assignment = np.empty(n_c, dtype=np.int64)
    dots = np.empty(n_c, dtype=np.float64)
    cnorms = np.empty(n_c, dtype=np.float64)
    for i in range(n_c):
        cvec = _content_vec(content, i)
        cn = float(np.sqrt(np.dot(cvec, cvec)))
        cnorms[i] = cn
        tol = _REFINE_REL_TOL * cn + 1e-30
        if np.isfinite(rowmax[i]):
            cand = np.flatnonzero(scores[i] >= rowmax[i] - tol)
        else:
            cand = np.arange(len(style))
        best_j = -1
        best_val = -np.inf
        best_dot = 0.0
        for j in cand:
            j = int(j)
            if norms[j] == 0.0:
                val, dot = -np.inf, 0.0
            else:
                dot = _pair_dot(cvec, style.patch(j))
                val = dot / norms[j]
            if best_j < 0 or val > best_val:
                best_j, best_val, best_dot = j, val, dot
        assignment[i] = best_j
        dots[i] = best_dot
    return assignment, dots, cnorms


def _match_naive(content: PatchSet, style: PatchSet, norms: np.ndarray):
    n_c, n_s = len(content), len(style)
    svecs = [np.ascontiguousarray(style.patch(j), dtype=np.float64).reshape(-1) for j in range(n_s)]
    assignment = np.empty(n_c, dtype=np.int64)
    dots = np.empty(n_c, dtype=np.float64)
    cnorms = np.empty(n_c, dtype=np.float64)
    for i in range(n_c):
        cvec = _content_vec(content, i)
        cnorms[i] = float(np.sqrt(np.dot(cvec, cvec)))
        best_j = -1
        best_val = -np.inf
        best_dot = 0.0
        for j in range(n_s):
            if norms[j] == 0.0:
                val, dot = -np.inf, 0.0
            else:
                dot = float(np.dot(cvec, svecs[j]))
                val = dot / norms[j]
            if best_j < 0 or val > best_val:
                best_j, best_val, best_dot = j, val, dot
        assignment[i] = best_j
        dots[i] = best_dot
    return assignment, dots, cnorms


def match_patches(content: PatchSet, style: PatchSet, matcher: str = "gemm") -> MatchAssignment:
    """Assign each content patch the style patch with the largest normalised
    inner product (style side L2-normalised), ties broken by smallest index.

    Reported scores are true cosines of the winning pairs. Zero-norm style
    patches rank below everything; a zero-norm content patch scores 0
    against every candidate and so takes the first eligible index.
    """
    if matcher not in MATCHERS:
        raise EngineError(f"matcher must be one of {MATCHERS}, got {matcher!r}")
    if len(style) == 0:
        raise EngineError("style patch set is empty")
    if content.channels != style.channels:
        raise DimensionError(
            f"channel mismatch: {content.channels} vs {style.channels}"
        )
    if content.patch_size != style.patch_size:
        raise DimensionError(
            f"patch size mismatch: {content.patch_size} vs {style.patch_size}"
        )
    norms = _style_norms(style)
    if matcher == "gemm":
        assignment, dots, cnorms = _match_gemm(content, style, norms)
    else:
        assignment, dots, cnorms = _match_naive(content, style, norms)
    score = np.array(
        [_cosine(dots[i], cnorms[i], norms[assignment[i]]) for i in range(len(content))]
    )
    return MatchAssignment(len(content), len(style), assignment, score)


def _lss(fg: FeatureMap, fs: FeatureMap, cfg: TssatConfig) -> tuple[FeatureMap, MatchAssignment]:
    if fg.channels != fs.channels:
        raise DimensionError(
            f"channel mismatch: content has {fg.channels}, style has {fs.channels}"
        )
    content_ps = extract_patches(fg, cfg.patch_size, cfg.content_stride)
    style_ps = extract_patches(fs, cfg.patch_size, cfg.style_stride)
    match = match_patches(content_ps, style_ps, matcher=cfg.matcher)
    k, c = cfg.patch_size, fg.channels
    swapped = np.empty((len(content_ps), c, k, k), dtype=np.float32)
    for i in range(len(content_ps)):
        j = int(match.assignment[i])
        swapped[i] = swap_patch_stats(content_ps.patch(i), style_ps.patch(j), cfg.epsilon)
    out = recombine_patches(content_ps.with_patches(swapped), background=fg)
    return out, match


def lss(fg: FeatureMap, fs: FeatureMap, cfg: TssatConfig = TssatConfig()) -> FeatureMap:
    """Local statistics swap: match patches, swap window stats, recombine.

    Positions not covered by the content patch grid keep their ``fg`` values.
    """
    return _lss(fg, fs, cfg)[0]


def tssat(fc: FeatureMap, fs: FeatureMap, cfg: TssatConfig = TssatConfig()) -> tuple[FeatureMap, MatchAssignment]:
    """Global alignment followed by local statistics swap.

    Returns the transformed map and the patch assignment the swap used.
    Deterministic for fixed inputs and config.
    """
    fg = gsa(fc, fs, cfg.epsilon)
    return _lss(fg, fs, cfg)
