"""Superintegrable geodesic flows on surfaces of revolution: construction and verification.

Modules: ``symfun`` (exact symmetric functions of roots), ``profile`` (radial profiles solving
the linearizing ODE), ``integrals`` (closed-form conserved quantities), ``dynamics`` (geodesic
integration and drift), ``geometry`` (curvature, embedding, endpoints) with ``catalog``
(global examples), ``cascade`` (degree reduction) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConstraintViolated,
    DegenerateSpec,
    DuplicateRoot,
    FitFailure,
    InversionFailure,
    NotSimple,
    OutOfDomain,
    SameIndex,
    SirevError,
    StepFailure,
)
from .model import ModelSpec, make_model  # noqa: E402
from .phase import PhasePoint  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "ConstraintViolated",
    "DegenerateSpec",
    "DuplicateRoot",
    "FitFailure",
    "InversionFailure",
    "ModelSpec",
    "NotSimple",
    "OutOfDomain",
    "PhasePoint",
    "SameIndex",
    "SirevError",
    "StepFailure",
    "make_model",
]
