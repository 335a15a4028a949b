"""Exception hierarchy.

Everything derives from QhhgError so callers can catch the whole family;
the leaves also subclass the matching builtin (ValueError / RuntimeError)
to behave sensibly in generic code.
"""


class QhhgError(Exception):
    """Base class for all package errors."""


class ConfigError(QhhgError, ValueError):
    """Malformed or inconsistent run configuration."""


class ParameterError(QhhgError, ValueError):
    """A physical parameter is out of its valid range."""


class ShapeError(QhhgError, ValueError):
    """Mismatched grids or array shapes."""


class SupportError(QhhgError, ValueError):
    """A state's support does not fit the grid it was asked to live on."""


class ExtrapolationError(QhhgError, ValueError):
    """Requested evaluation outside the sampled/fitted domain."""


class ResolutionError(QhhgError, ValueError):
    """Time step or grid spacing too coarse for the requested dynamics."""


class NumericalError(QhhgError, RuntimeError):
    """Propagation or iteration failed (NaN, non-convergence, norm loss)."""


class FitError(QhhgError, RuntimeError):
    """Least-squares fit rejected (ill-conditioning or excess residual)."""


class SingularFlowError(QhhgError, RuntimeError):
    """Fitted advection profile crosses zero inside the flow domain."""


class DomainError(QhhgError, ValueError):
    """Flow transport would leave the map's domain or the grid."""


class ResourceLimitError(QhhgError, RuntimeError):
    """Request exceeds the built-in desk-scale resource guard."""
