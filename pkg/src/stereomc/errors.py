"""Exception types shared across the package."""


class StereoError(Exception):
    """Base class for all stereomc errors."""


class PoleError(StereoError):
    """State at (or numerically indistinguishable from) the projection pole."""


class DomainError(StereoError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DimensionMismatch(StereoError, ValueError):
    """Vector/matrix dimensions inconsistent with the configured dimension."""


class DegenerateProposal(StereoError):
    """Tangent proposal collapsed to (numerically) zero length."""


class DegenerateGradient(StereoError):
    """Reflection requested where the tangential gradient vanishes."""


class DegenerateDraw(StereoError):
    """Velocity refreshment draw collapsed to (numerically) zero length."""


class ClockError(StereoError):
    """Event-clock integration failed (non-finite intensity on the grid)."""


class EmptyTrace(StereoError, ValueError):
    """Diagnostic requested on a trace with no transitions."""


class DegenerateSeries(StereoError, ValueError):
    """Diagnostic requested on a (numerically) constant series."""


class InsufficientPath(StereoError, ValueError):
    """Path too short for the requested batch layout."""


class UnsupportedFamily(StereoError, ValueError):
    """Closed-form classification asked for a family the theory does not cover."""


class DegenerateCase(StereoError, ValueError):
    """Parameter combination at which the limiting approximation degenerates."""


class SchemaError(StereoError, ValueError):
    """Config file failed validation; message carries the offending key path."""
