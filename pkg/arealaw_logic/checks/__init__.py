"""Standalone matrix-inequality suites."""
from .suites import (
    CauchySchwarzSuite,
    CheckSuite,
    CheckSuiteFactory,
    GibbsVariationalSuite,
    PeierlsBogoliubovSuite,
    PinskerSuite,
)

__all__ = [
    "CauchySchwarzSuite",
    "CheckSuite",
    "CheckSuiteFactory",
    "GibbsVariationalSuite",
    "PeierlsBogoliubovSuite",
    "PinskerSuite",
]
