"""Exception types shared across the engine.

Validation failures (bad shapes, degenerate statistics, malformed files)
derive from ValueError so callers can catch them uniformly; I/O failures
stay OSError. The CLI maps the former to exit code 2 and the latter to 1.
"""


class EngineError(ValueError):
    """Base class for all validation errors raised by the engine."""


class DimensionError(EngineError):
    """Shapes or sizes are incompatible with the requested operation."""


class DegenerateChannelError(EngineError):
    """A channel has zero variance and no epsilon was supplied to guard it."""


class TssfFormatError(EngineError):
    """A TSSF file or bundle manifest violates the on-disk contract."""
