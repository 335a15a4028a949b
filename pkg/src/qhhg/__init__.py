"""qhhg: quantum-optical state of harmonic radiation from driven 1D systems.

The package propagates a field-driven model electron whose dynamics depend
parametrically on the quadrature coordinate of one quantized light mode,
collects the q-dependent dipole response, evolves the light-mode state both
on a quadrature grid and through an analytic flow (generalized shift)
operator, and quantifies squeezing and Wigner negativity of the resulting
radiation.  A brute-force 2D solver over (x, q) serves as the validation
oracle.
"""

from qhhg import units
from qhhg.errors import (
    ConfigError,
    DomainError,
    ExtrapolationError,
    FitError,
    NumericalError,
    ParameterError,
    QhhgError,
    ResolutionError,
    ResourceLimitError,
    ShapeError,
    SingularFlowError,
    SupportError,
)

__version__ = "0.1.0"

__all__ = [
    "units",
    "QhhgError",
    "ConfigError",
    "ParameterError",
    "ShapeError",
    "SupportError",
    "ExtrapolationError",
    "ResolutionError",
    "NumericalError",
    "FitError",
    "SingularFlowError",
    "DomainError",
    "ResourceLimitError",
    "__version__",
]
