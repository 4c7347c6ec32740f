"""Exception types shared across the package."""


class MinsurfError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(MinsurfError, ValueError):
    """Bad chart/run configuration (non-positive extents, resolution too low, ...)."""


class InputFormatError(MinsurfError, ValueError):
    """Malformed input file (header, shapes, unknown keys)."""


class AccuracyError(MinsurfError):
    """Requested derivative order cannot be delivered at the chart resolution."""


class ConformalityError(MinsurfError):
    """Sampled immersion is not conformal to tolerance."""


class DegenerateImmersionError(MinsurfError):
    """Conformal factor below floor somewhere on the chart."""


class SubstantialityError(MinsurfError):
    """Surface spans a lower-dimensional sphere than declared (flag collapses)."""


class FrameNormalizationError(MinsurfError):
    """Internal consistency gate on frame-projected components failed."""


class InternalConsistencyError(MinsurfError):
    """Two independent routes to the same quantity disagree beyond tolerance."""


class PreconditionError(MinsurfError):
    """Operation invoked on input that violates its stated precondition."""


class ResolutionError(MinsurfError):
    """Feature (zeros, excision disks) too fine for the grid."""


class UndefinedResultError(MinsurfError):
    """Quantity undefined on the whole evaluation set (e.g. K >= 1 everywhere)."""
