"""Wall-clock benchmark harness for the two-stage transform.

Runs are interleaved round-robin across patch sizes, with the order rotated
every round, so drift in machine load penalises every k equally. One
warm-up call per k is excluded from statistics and the garbage collector is
paused while timing.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass
from statistics import median

from .core import FeatureMap
from .errors import EngineError
from .transform import TssatConfig, tssat

__all__ = ["BenchResult", "run_benchmark"]


@dataclass(frozen=True)
class BenchResult:
    k: int
    median_seconds: float
    min_seconds: float
    max_seconds: float


def run_benchmark(
    content: FeatureMap,
    style: FeatureMap,
    k_values,
    repeat: int = 9,
    content_stride: int | None = None,
    style_stride: int = 1,
    epsilon: float = 1e-5,
    matcher: str = "gemm",
) -> list[BenchResult]:
    """Median/min/max wall seconds of ``tssat`` per patch size."""
    ks = [int(k) for k in k_values]
    if not ks:
        raise EngineError("need at least one patch size to benchmark")
    if repeat < 1:
        raise EngineError(f"repeat must be >= 1, got {repeat}")
    cfgs = {
        k: TssatConfig(
            patch_size=k,
            content_stride=content_stride,
            style_stride=style_stride,
            epsilon=epsilon,
            matcher=matcher,
        )
        for k in ks
    }
    for k in ks:
        tssat(content, style, cfgs[k])
    timings: dict[int, list[float]] = {k: [] for k in ks}
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for rnd in range(repeat):
            shift = rnd % len(ks)
            for k in ks[shift:] + ks[:shift]:
                start = time.perf_counter()
                tssat(content, style, cfgs[k])
                timings[k].append(time.perf_counter() - start)
    finally:
        if was_enabled:
            gc.enable()
    return [
        BenchResult(k, median(timings[k]), min(timings[k]), max(timings[k]))
        for k in ks
    ]
