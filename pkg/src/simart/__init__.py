"""Random fractal measures built from spatially independent martingales.

Simulates Poissonian cutouts, fractal percolation, weight cascades and a
dyadic Salem construction, and measures their intersections with planes,
algebraic curves and self-similar sets.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CurveSingularityError,
    ResourceError,
    SeedPath,
    SimartError,
    UnsupportedShapeError,
    ValidationError,
)
from .models import ModelSpec, realize  # noqa: E402

__all__ = [
    "__version__",
    "SeedPath",
    "ModelSpec",
    "realize",
    "SimartError",
    "ValidationError",
    "ResourceError",
    "UnsupportedShapeError",
    "CurveSingularityError",
]
