"""Figure rendering for CLI reports. Imported lazily; uses the Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_bench_figure"]


def save_bench_figure(results, path) -> None:
    """Line chart of median transform time against patch size.

    Min/max of the timed runs are drawn as a shaded band around the median.
    """
    ks = [r.k for r in results]
    med = [r.median_seconds for r in results]
    lo = [r.min_seconds for r in results]
    hi = [r.max_seconds for r in results]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.fill_between(ks, lo, hi, alpha=0.2, color="tab:blue", label="min..max")
    ax.plot(ks, med, marker="o", color="tab:blue", label="median")
    ax.set_xlabel("patch size k")
    ax.set_ylabel("wall time (s)")
    ax.set_xticks(ks)
    ax.set_ylim(bottom=0)
    ax.legend(frameon=False)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
