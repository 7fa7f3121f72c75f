"""Sketch-based property testers for sparsity and dimensionality."""

from .errors import (BudgetExceeded, CertificationFailure, DegenerateInput, InvalidArgument,
                     PreconditionViolation)
from .testers import (DimConfig, KnownDesignConfig, UnknownDesignConfig, Verdict, query_budget,
                      test_dimension, test_known, test_unknown)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded", "CertificationFailure", "DegenerateInput", "InvalidArgument", "PreconditionViolation",
    "DimConfig", "KnownDesignConfig", "UnknownDesignConfig", "Verdict", "query_budget",
    "test_dimension", "test_known", "test_unknown", "__version__",
]
