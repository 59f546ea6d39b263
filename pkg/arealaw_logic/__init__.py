"""Bose-Hubbard thermal area-law verification package."""
__version__ = "0.1.0"

from .models import (
    Bipartition,
    BoundChain,
    ChainOutcome,
    ChainParameters,
    ChainReport,
    ExperimentConfig,
    LatticeSpec,
    LinkState,
    LinkStatus,
    OneParticleDM,
    PlanckEstimate,
    ReportRecord,
    SpectrumTable,
)

__all__ = [
    "Bipartition",
    "BoundChain",
    "ChainOutcome",
    "ChainParameters",
    "ChainReport",
    "ExperimentConfig",
    "LatticeSpec",
    "LinkState",
    "LinkStatus",
    "OneParticleDM",
    "PlanckEstimate",
    "ReportRecord",
    "SpectrumTable",
    "__version__",
]
