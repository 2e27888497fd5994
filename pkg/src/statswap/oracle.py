"""Brute-force reference implementations used only by the test suite.

Everything here runs scalar Python loops over 64-bit floats, accumulating
in plain row-major order, so results are independent of any vectorised or
blocked arithmetic in the engine. Performance is explicitly a non-goal.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ChannelStats, FeatureMap, PatchSet
from .errors import EngineError
from .transform import MatchAssignment

__all__ = ["naive_match", "naive_stats", "softmax_rows", "l2_norm"]


def _patch_values(patch: np.ndarray) -> list[float]:
    return [float(v) for v in np.asarray(patch).reshape(-1)]


def naive_match(content: PatchSet, style: PatchSet) -> MatchAssignment:
    """Triple-nested-loop patch matcher with the first-maximum tie rule.

    Scores are inner products against L2-normalised style patches; a
    zero-norm style patch counts as minus infinity.
    """
    if len(style) == 0:
        raise EngineError("style patch set is empty")
    s_vecs = [_patch_values(style.patch(j)) for j in range(len(style))]
    s_norms = []
    for vec in s_vecs:
        acc = 0.0
        for v in vec:
            acc += v * v
        s_norms.append(math.sqrt(acc))
    assignment = []
    scores = []
    for i in range(len(content)):
        c_vec = _patch_values(content.patch(i))
        c_norm = 0.0
        for v in c_vec:
            c_norm += v * v
        c_norm = math.sqrt(c_norm)
        best_j = -1
        best_val = -math.inf
        best_dot = 0.0
        for j in range(len(style)):
            if s_norms[j] == 0.0:
                val, dot = -math.inf, 0.0
            else:
                dot = 0.0
                for a, b in zip(c_vec, s_vecs[j]):
                    dot += a * b
                val = dot / s_norms[j]
            if best_j < 0 or val > best_val:
                best_j, best_val, best_dot = j, val, dot
        assignment.append(best_j)
        if c_norm == 0.0 or s_norms[best_j] == 0.0:
            scores.append(0.0)
        else:
            scores.append(max(-1.0, min(1.0, best_dot / (c_norm * s_norms[best_j]))))
    return MatchAssignment(
        len(content),
        len(style),
        np.array(assignment, dtype=np.int64),
        np.array(scores, dtype=np.float64),
    )


def naive_stats(fmap: FeatureMap) -> ChannelStats:
    """Two-pass scalar mean/std per channel, epsilon 0."""
    c = fmap.channels
    n = fmap.height * fmap.width
    means = []
    stds = []
    for ch in range(c):
        vals = [float(v) for v in fmap.data[ch].reshape(-1)]
        total = 0.0
        for v in vals:
            total += v
        mean = total / n
        var = 0.0
        for v in vals:
            var += (v - mean) * (v - mean)
        means.append(mean)
        stds.append(math.sqrt(var / n))
    return ChannelStats(np.array(means), np.array(stds))


def softmax_rows(matrix: np.ndarray) -> np.ndarray:
    """Two-pass (max, then exp-sum) row softmax in scalar arithmetic.

    Entries of exactly ``-inf`` get probability 0.
    """
    out = []
    for row in np.asarray(matrix, dtype=np.float64):
        vals = [float(v) for v in row]
        mx = -math.inf
        for v in vals:
            if v > mx:
                mx = v
        exps = [math.exp(v - mx) if v != -math.inf else 0.0 for v in vals]
        total = 0.0
        for e in exps:
            total += e
        out.append([e / total for e in exps])
    return np.array(out, dtype=np.float64)


def l2_norm(values) -> float:
    """Scalar-loop Euclidean norm of a flattened array."""
    acc = 0.0
    for v in np.asarray(values, dtype=np.float64).reshape(-1):
        acc += float(v) * float(v)
    return math.sqrt(acc)
