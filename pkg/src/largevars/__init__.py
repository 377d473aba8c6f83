"""High-dimensional cointegration testing with Airy_1 partial-sum critical values."""

__version__ = "0.1.0"

from .coint import (
    TestResult,
    WachterParams,
    cointegration_eigenvalues,
    run_test,
    scaling_constants,
)
from .errors import (
    DimensionError,
    LargeVarsError,
    NotPositiveDefinite,
    OutOfRange,
    UnsupportedCorrection,
)
from .tables import QuantileTable, decide, p_value, quantile_table

__all__ = [
    "DimensionError",
    "LargeVarsError",
    "NotPositiveDefinite",
    "OutOfRange",
    "QuantileTable",
    "TestResult",
    "UnsupportedCorrection",
    "WachterParams",
    "cointegration_eigenvalues",
    "decide",
    "p_value",
    "quantile_table",
    "run_test",
    "scaling_constants",
]
