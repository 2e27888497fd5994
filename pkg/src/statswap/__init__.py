"""Feature-statistics style transfer engine.

Global statistics alignment plus patch-wise local statistics swap over
feature maps, the matching loss suite, a bit-exact tensor file format, and
a patch-size benchmark harness.
"""

from .bench import BenchResult, run_benchmark
from .core import (
    ChannelStats,
    FeatureMap,
    PatchSet,
    channel_stats,
    extract_patches,
    mvn_normalize,
    recombine_patches,
)
from .errors import (
    DegenerateChannelError,
    DimensionError,
    EngineError,
    TssfFormatError,
)
from .losses import (
    CANONICAL_LAYERS,
    CONTENT_LAYERS,
    AttentionMap,
    LayerFeatures,
    LossReport,
    LossWeights,
    attention_content_loss,
    attention_map,
    content_loss,
    identity_loss,
    patch_style_loss,
    style_loss,
    total_loss,
)
from .transform import (
    MatchAssignment,
    TssatConfig,
    gsa,
    lss,
    match_patches,
    swap_patch_stats,
    tssat,
)
from .tssf import (
    read_bundle,
    read_tssf,
    read_tssf_array,
    write_bundle,
    write_tssf,
    write_tssf_array,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "BenchResult",
    "CANONICAL_LAYERS",
    "CONTENT_LAYERS",
    "ChannelStats",
    "DegenerateChannelError",
    "DimensionError",
    "EngineError",
    "FeatureMap",
    "LayerFeatures",
    "LossReport",
    "LossWeights",
    "MatchAssignment",
    "PatchSet",
    "TssatConfig",
    "TssfFormatError",
    "attention_content_loss",
    "attention_map",
    "channel_stats",
    "content_loss",
    "extract_patches",
    "gsa",
    "identity_loss",
    "lss",
    "match_patches",
    "mvn_normalize",
    "patch_style_loss",
    "read_bundle",
    "read_tssf",
    "read_tssf_array",
    "recombine_patches",
    "run_benchmark",
    "style_loss",
    "swap_patch_stats",
    "total_loss",
    "tssat",
    "write_bundle",
    "write_tssf",
    "write_tssf_array",
]
