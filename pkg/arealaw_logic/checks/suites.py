"""Randomised and exhaustive suites for the finite-dimensional matrix inequalities."""
from __future__ import annotations

from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import linalg

from .. import models
from ..bounds import peierls_bogoliubov_check
from ..fock import (
    SiteOperatorKind,
    assemble_bose_hubbard,
    build_basis,
    cauchy_schwarz_pair,
    site_operator,
)
from ..gibbs import (
    decoupling_distance,
    entropy,
    expectation,
    free_energy,
    gibbs_state,
    operator_norm,
    random_density_matrix,
    reduced_states,
    truncated_correlation,
)
from ..lattice import bipartition, build_lattice

# (d, L, n_max, beta, J, U, mu)
HamiltonianPoint = Tuple[int, int, int, float, float, float, float]

VARIATIONAL_POINTS: Tuple[HamiltonianPoint, ...] = (
    (1, 2, 2, 1.0, 1.0, 1.0, 1.0),
    (1, 3, 2, 2.0, 0.5, 2.0, 0.5),
    (1, 4, 1, 0.5, 1.0, 1.0, 1.0),
)
PINSKER_POINTS: Tuple[HamiltonianPoint, ...] = (
    (1, 4, 2, 0.5, 1.0, 1.0, 1.0),
    (1, 4, 2, 1.0, 1.0, 1.0, 1.0),
    (1, 4, 2, 2.0, 1.0, 1.0, 1.0),
    (1, 4, 3, 1.0, 1.0, 2.0, 0.5),
    (2, 2, 2, 1.0, 1.0, 1.0, 1.0),
)
CAUCHY_SCHWARZ_LATTICES: Tuple[Tuple[int, int, int], ...] = (
    (1, 4, 1),
    (1, 4, 2),
    (1, 4, 3),
    (1, 4, 4),
    (2, 2, 1),
    (2, 2, 2),
)


class CheckSuite:
    """Base interface: ``run`` evaluates every case and records the worst slack."""

    name = ""
    tolerance = 0.0

    def run(self, rng: np.random.Generator) -> models.CheckResult:  # pragma: no cover - interface method
        raise NotImplementedError

    def _result(self) -> models.CheckResult:
        return models.CheckResult(name=self.name, tolerance=self.tolerance)


def _random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    gaussian = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (gaussian + gaussian.conj().T) / (2.0 * np.sqrt(dim))


def random_graded_pair(
    rng: np.random.Generator,
    max_dimension: int = 64,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hermitian K, P that are block diagonal over random number sectors, with the grading."""
    sizes: List[int] = []
    while not sizes or (sum(sizes) < max_dimension and rng.random() < 0.7):
        sizes.append(int(rng.integers(1, 9)))
    while sum(sizes) > max_dimension:
        sizes.pop()
    K = linalg.block_diag(*[_random_hermitian(size, rng) * 3.0 for size in sizes])
    P = linalg.block_diag(*[_random_hermitian(size, rng) * 3.0 for size in sizes])
    grading = np.repeat(np.arange(len(sizes)), sizes)
    return K, P, grading


class PeierlsBogoliubovSuite(CheckSuite):
    name = "peierls-bogoliubov"
    tolerance = 1e-10

    def __init__(self, pairs: int = 200, max_dimension: int = 64) -> None:
        self.pairs = pairs
        self.max_dimension = max_dimension

    def run(self, rng: np.random.Generator) -> models.CheckResult:
        result = self._result()
        for _ in range(self.pairs):
            K, P, grading = random_graded_pair(rng, self.max_dimension)
            outcome = peierls_bogoliubov_check(K, P, grading)
            result.record(outcome.slack_log)
            result.record(outcome.slack_shifted)
        result.details.append(f"{self.pairs} pairs, dim <= {self.max_dimension}, both forms")
        return result


def _gibbs_setup(point: HamiltonianPoint):
    d, L, n_max, beta, J, U, mu = point
    lattice = build_lattice(d, L)
    basis = build_basis(lattice, n_max)
    H = assemble_bose_hubbard(basis, J, U, mu)
    return lattice, basis, H, beta, gibbs_state(H, beta)


class GibbsVariationalSuite(CheckSuite):
    name = "gibbs-variational"
    tolerance = 1e-9

    def __init__(self, samples: int = 100, points: Sequence[HamiltonianPoint] = VARIATIONAL_POINTS) -> None:
        self.samples = samples
        self.points = tuple(points)

    def run(self, rng: np.random.Generator) -> models.CheckResult:
        result = self._result()
        for point in self.points:
            _, basis, H, beta, rho = _gibbs_setup(point)
            minimum = free_energy(H, beta, rho).value
            for _ in range(self.samples):
                sigma = random_density_matrix(basis.dimension, rng)
                result.record(free_energy(H, beta, sigma).value - minimum)
            result.details.append(f"point {point}: F(Gibbs) = {minimum:.12g}")
        return result


class PinskerSuite(CheckSuite):
    """Pinsker and the correlation-norm bound on Gibbs states of small boxes."""

    name = "pinsker"
    tolerance = 1e-9

    def __init__(self, points: Sequence[HamiltonianPoint] = PINSKER_POINTS) -> None:
        self.points = tuple(points)

    def run(self, rng: np.random.Generator) -> models.CheckResult:
        result = self._result()
        for point in self.points:
            lattice, basis, _, _, rho = _gibbs_setup(point)
            cut = bipartition(lattice, lattice.L // 2)
            rho_A, rho_B = reduced_states(rho, cut)
            mi = entropy(rho_A) + entropy(rho_B) - entropy(rho)
            distance = decoupling_distance(rho, rho_A, rho_B)
            result.record(mi - 0.5 * distance**2)

            M_A = site_operator(basis, cut.A_sites[0], SiteOperatorKind.NUMBER)
            M_B = site_operator(basis, cut.B_sites[-1], SiteOperatorKind.NUMBER)
            correlation = truncated_correlation(M_A, M_B, rho, cut)
            ceiling = operator_norm(M_A) * operator_norm(M_B) * distance
            result.record(ceiling - abs(correlation))
            result.details.append(f"point {point}: I={mi:.6g} distance={distance:.6g} C={correlation:.3e}")
        return result


class CauchySchwarzSuite(CheckSuite):
    """Smallest eigenvalue of n_x + n_y -/+ (a_x^dagger a_y + h.c.) on every boundary bond."""

    name = "cauchy-schwarz"
    tolerance = 1e-10

    def __init__(self, lattices: Sequence[Tuple[int, int, int]] = CAUCHY_SCHWARZ_LATTICES) -> None:
        self.lattices = tuple(lattices)

    def run(self, rng: np.random.Generator) -> models.CheckResult:
        result = self._result()
        for d, L, n_max in self.lattices:
            lattice = build_lattice(d, L)
            basis = build_basis(lattice, n_max)
            cut = bipartition(lattice, L // 2)
            for x, y in cut.boundary_bonds:
                for operator in cauchy_schwarz_pair(basis, x, y):
                    lowest = min(
                        float(linalg.eigvalsh(operator.sector_block(N))[0]) for N in basis.numbers
                    )
                    result.record(lowest)
            result.details.append(f"d={d} L={L} n_max={n_max}: {len(cut.boundary_bonds)} boundary bonds")
        return result


class CheckSuiteFactory:
    """Registry of the inequality suites by name."""

    def __init__(self) -> None:
        self._registry: Dict[str, Callable[[], CheckSuite]] = {}

    def register(self, name: str, builder: Callable[[], CheckSuite]) -> None:
        self._registry[name] = builder

    def create(self, name: str) -> CheckSuite:
        builder = self._registry.get(name)
        if builder is None:
            raise KeyError(name)
        return builder()

    def names(self) -> List[str]:
        return list(self._registry)

    @classmethod
    def build_default(cls) -> "CheckSuiteFactory":
        factory = cls()
        factory.register(PeierlsBogoliubovSuite.name, PeierlsBogoliubovSuite)
        factory.register(GibbsVariationalSuite.name, GibbsVariationalSuite)
        factory.register(PinskerSuite.name, PinskerSuite)
        factory.register(CauchySchwarzSuite.name, CauchySchwarzSuite)
        return factory


__all__ = [
    "CauchySchwarzSuite",
    "CheckSuite",
    "CheckSuiteFactory",
    "GibbsVariationalSuite",
    "PeierlsBogoliubovSuite",
    "PinskerSuite",
    "random_graded_pair",
]
