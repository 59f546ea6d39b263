"""Core data models for the area-law verification pipeline."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

Site = Tuple[int, ...]
Bond = Tuple[int, int]


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic d-dimensional box. Sites are 1-based coordinate tuples, bonds index into ``sites``."""

    d: int
    L: int
    sites: Tuple[Site, ...]
    bonds: Tuple[Bond, ...]
    bond_weights: Tuple[int, ...]

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def index_of(self, site: Site) -> int:
        try:
            return self.sites.index(tuple(site))
        except ValueError as exc:
            raise ValueError(f"{site} is not a site of the {self.d}d box of side {self.L}") from exc

    def weighted_bonds(self) -> Iterator[Tuple[int, int, int]]:
        for (x, y), weight in zip(self.bonds, self.bond_weights):
            yield x, y, weight


@dataclass(frozen=True)
class Bipartition:
    """Slab split along the first axis: A holds the sites with first coordinate <= L_A."""

    lattice: LatticeSpec
    L_A: int
    A_sites: Tuple[int, ...]
    B_sites: Tuple[int, ...]
    boundary_bonds: Tuple[Bond, ...]
    boundary_weights: Tuple[int, ...]

    @property
    def boundary_weight(self) -> int:
        return int(sum(self.boundary_weights))

    def side_of(self, site: int) -> str:
        return "A" if site in self.A_sites else "B"


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Eigenpairs of the periodic chain Laplacian, column ``i - 1`` holding v_i."""

    L: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: Tuple[str, ...] = ()

    def multiplicities(self, decimals: int = 10) -> Dict[float, int]:
        counts: Dict[float, int] = {}
        for value in np.round(self.eigenvalues, decimals):
            key = float(value) + 0.0
            counts[key] = counts.get(key, 0) + 1
        return dict(sorted(counts.items()))


@dataclass(frozen=True)
class FreeEnergyValue:
    energy: float
    entropy: float
    beta: float
    value: float

    @classmethod
    def from_terms(cls, energy: float, entropy: float, beta: float) -> "FreeEnergyValue":
        return cls(energy=energy, entropy=entropy, beta=beta, value=energy - entropy / beta)


@dataclass(frozen=True)
class OneParticleDM:
    """Diagonal of (e^{beta(-J Laplacian + gamma)} - 1)^{-1}, the same at every site."""

    lattice: LatticeSpec
    beta: float
    gamma: float
    J: float
    g: float


@dataclass(frozen=True)
class PlanckEstimate:
    d: int
    beta: float
    gamma: float
    J: float
    f_value: float
    error_estimate: float
    epsilon1: float = 0.0
    epsilon2: float = 0.0
    points: int = 0

    @property
    def lemma_s3_rhs(self) -> float:
        return 2.0**self.d * (1.0 + self.epsilon1) * self.f_value + self.epsilon2

    def lemma_s4_rhs(self, alpha: float) -> float:
        from .quasifree import lemma_s4_rhs

        return lemma_s4_rhs(self.d, alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class PeierlsBogoliubovResult:
    """Both forms of the Peierls-Bogoliubov inequality for one (K, P) pair."""

    lhs: float
    rhs_log: float
    rhs_shifted: float

    @property
    def slack_log(self) -> float:
        return self.rhs_log - self.lhs

    @property
    def slack_shifted(self) -> float:
        return self.rhs_shifted - self.lhs


@dataclass(frozen=True)
class Prop2Bound:
    c0: float
    n_free: float
    w_free: float
    shift: float
    exact_free: float
    relaxed: float


class LinkState(Enum):
    PASS = "pass"
    FLAG = "flag"
    UNKNOWN = "unknown"


@dataclass
class LinkStatus:
    state: LinkState
    slack: Optional[float] = None
    message: str = ""


class ChainOutcome(Enum):
    PASS = "pass"
    FLAG = "flag"
    UNKNOWN = "unknown"

    @classmethod
    def from_links(cls, statuses: Sequence[LinkStatus]) -> "ChainOutcome":
        if not statuses:
            return cls.UNKNOWN
        outcome = cls.PASS
        for status in statuses:
            if status.state is LinkState.FLAG:
                return cls.FLAG
            if status.state is LinkState.UNKNOWN:
                outcome = cls.UNKNOWN
        return outcome


@dataclass
class ChainReport:
    links: Dict[str, LinkStatus] = field(default_factory=dict)
    overall_status: ChainOutcome = ChainOutcome.UNKNOWN

    @classmethod
    def empty(cls) -> "ChainReport":
        return cls()

    def register(self, key: str, status: LinkStatus) -> None:
        self.links[key] = status
        self.overall_status = ChainOutcome.from_links(list(self.links.values()))

    def flagged(self) -> List[str]:
        return [key for key, status in self.links.items() if status.state is LinkState.FLAG]


@dataclass(frozen=True)
class ChainParameters:
    d: int
    L: int
    L_A: int
    n_max: int
    beta: float
    J: float
    U: float
    mu: float
    gamma: Optional[float] = None
    n_cap: Optional[int] = None
    quad_tol: float = 1e-10
    dimension_guard: int = 20_000

    @property
    def resolved_gamma(self) -> float:
        if self.gamma is not None:
            return float(self.gamma)
        return max(1.0 / self.beta, 2.0 * self.d * self.J + 1.0)

    def key(self) -> str:
        return f"L={self.L}|n_max={self.n_max}|beta={self.beta!r}"


@dataclass
class BoundChain:
    """Every value of the inequality chain for one parameter point, with side checks."""

    params: ChainParameters
    gamma: float = 0.0
    exact_mi: float = 0.0
    lemma1_value: float = 0.0
    prop1_value: float = 0.0
    prop2_value: float = 0.0
    prop2_relaxed_value: float = 0.0
    step3_value: float = 0.0
    theorem_value: float = 0.0
    main_constant: float = 0.0
    c0: float = 0.0
    entropy_ab: float = 0.0
    entropy_a: float = 0.0
    entropy_b: float = 0.0
    n_expectation: float = 0.0
    n_bound_free: float = 0.0
    n_bound_step3: float = 0.0
    boundary_bonds: int = 0
    boundary_weight: int = 0
    g: float = 0.0
    f_value: float = 0.0
    f_error: float = 0.0
    epsilon1: float = 0.0
    epsilon2: float = 0.0
    lemma_s3_rhs: float = 0.0
    zero_mode_bound: float = 0.0
    pb_literal_lhs: float = 0.0
    pb_literal_rhs: float = 0.0
    pb_exact_lhs: float = 0.0
    pb_exact_rhs: float = 0.0
    trace_distance: float = 0.0
    pinsker_slack: float = 0.0
    translation_spread: float = 0.0
    wick_pair_ed: float = 0.0
    wick_pair_quasifree: float = 0.0
    square_moment_ed: float = 0.0
    square_moment_quasifree: float = 0.0
    basis_dimension: int = 0
    report: ChainReport = field(default_factory=ChainReport.empty)

    @property
    def slacks(self) -> Dict[str, float]:
        return {
            "slack_mi_lemma1": self.lemma1_value - self.exact_mi,
            "slack_lemma1_prop1": self.prop1_value - self.lemma1_value,
            "slack_prop1_prop2": self.prop2_value - self.prop1_value,
            "slack_prop2_step3": self.step3_value - self.prop2_value,
            "slack_step3_theorem": self.theorem_value - self.step3_value,
            "slack_prop2_theorem": self.theorem_value - self.prop2_value,
        }


@dataclass
class ExperimentConfig:
    d: int = 1
    L: List[int] = field(default_factory=lambda: [4])
    L_A: Optional[int] = None
    n_max: List[int] = field(default_factory=lambda: [3])
    n_cap: Optional[int] = None
    beta: List[float] = field(default_factory=lambda: [1.0])
    J: float = 1.0
    U: float = 1.0
    mu: float = 1.0
    gamma: Optional[float] = None
    quad_tol: float = 1e-10
    dimension_guard: int = 20_000
    converge_tol: float = 1e-4
    seed: int = 20240101
    out: str = "."

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        payload = self.to_dict()
        payload.pop("out", None)
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def slab_width(self, L: int) -> int:
        return self.L_A if self.L_A is not None else L // 2

    def grid(self) -> List[ChainParameters]:
        points: List[ChainParameters] = []
        for L in self.L:
            for n_max in self.n_max:
                for beta in self.beta:
                    points.append(self.point(L, n_max, beta))
        return points

    def point(self, L: int, n_max: int, beta: float) -> ChainParameters:
        return ChainParameters(
            d=self.d,
            L=L,
            L_A=self.slab_width(L),
            n_max=n_max,
            beta=beta,
            J=self.J,
            U=self.U,
            mu=self.mu,
            gamma=self.gamma,
            n_cap=self.n_cap,
            quad_tol=self.quad_tol,
            dimension_guard=self.dimension_guard,
        )


class ErrorKind(Enum):
    CONFIG = "config"
    NUMERICAL = "numerical"
    GUARD = "guard"

    @property
    def exit_code(self) -> int:
        return {ErrorKind.CONFIG: 1, ErrorKind.NUMERICAL: 2, ErrorKind.GUARD: 3}[self]


@dataclass
class RecordError:
    kind: ErrorKind
    message: str


@dataclass
class ReportRecord:
    params: ChainParameters
    chain: Optional[BoundChain] = None
    version: str = ""
    config_hash: str = ""
    seed: int = 0
    wall_time: float = 0.0
    convergence_status: str = "unchecked"
    errors: List[RecordError] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.chain is not None and not self.errors


@dataclass
class ConvergenceRow:
    n_max: int
    exact_mi: float
    n_expectation: float
    mi_difference: Optional[float] = None
    n_difference: Optional[float] = None


@dataclass
class ConvergenceTable:
    L: int
    beta: float
    rows: List[ConvergenceRow] = field(default_factory=list)
    tolerance: float = 1e-4
    converged: bool = False
    note: str = ""

    @property
    def status(self) -> str:
        return "converged" if self.converged else "not converged"

    @property
    def selected_n_max(self) -> Optional[int]:
        if not self.converged or not self.rows:
            return None
        return self.rows[-1].n_max


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    worst_slack: float = float("inf")
    tolerance: float = 0.0
    details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.worst_slack >= -self.tolerance

    def record(self, slack: float) -> None:
        self.cases += 1
        self.worst_slack = min(self.worst_slack, float(slack))


__all__ = [
    "Bipartition",
    "Bond",
    "BoundChain",
    "ChainOutcome",
    "ChainParameters",
    "ChainReport",
    "CheckResult",
    "ConvergenceRow",
    "ConvergenceTable",
    "ErrorKind",
    "ExperimentConfig",
    "FreeEnergyValue",
    "LatticeSpec",
    "LinkState",
    "LinkStatus",
    "OneParticleDM",
    "PeierlsBogoliubovResult",
    "PlanckEstimate",
    "Prop2Bound",
    "RecordError",
    "ReportRecord",
    "Site",
    "SpectrumTable",
]
