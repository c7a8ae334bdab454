"""Exact construction and certification of orthogonal designs, weighing
matrices, unbiased and quasi-unbiased families, and related objects."""

__version__ = "0.1.0"

from .designs import OrthogonalDesign, certify_od, verify_od
from .errors import (BudgetExceeded, CertificationError, MatrixFormatError, OdkitError, PlugInError,
                     SearchError, ShapeError)

__all__ = [
    "__version__",
    "OrthogonalDesign",
    "certify_od",
    "verify_od",
    "OdkitError",
    "ShapeError",
    "CertificationError",
    "SearchError",
    "BudgetExceeded",
    "PlugInError",
    "MatrixFormatError",
]
