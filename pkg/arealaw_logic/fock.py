"""Truncated bosonic Fock spaces and sparse assembly of the Bose-Hubbard operators."""
from __future__ import annotations

import logging
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from . import models

logger = logging.getLogger(__name__)

DEFAULT_DIMENSION_GUARD = 20_000

SiteRef = Union[int, Sequence[int]]
BlockKey = Tuple[int, int]


class DimensionGuardError(RuntimeError):
    """Raised when the largest number sector exceeds the configured dimension guard."""


class SiteOperatorKind(Enum):
    ANNIHILATE = "annihilate"
    CREATE = "create"
    NUMBER = "number"

    @classmethod
    def from_string(cls, value: str) -> "SiteOperatorKind":
        normalized = value.lower().strip()
        for member in cls:
            if member.value == normalized:
                return member
        raise ValueError(f"Unknown site operator kind: {value}")


def sector_dimensions(n_sites: int, n_max: int, n_cap: Optional[int] = None) -> Dict[int, int]:
    """Number of occupation vectors with entries in 0..n_max summing to each N."""
    counts = [1]
    for _ in range(n_sites):
        widened = [0] * (len(counts) + n_max)
        for total, count in enumerate(counts):
            for n in range(n_max + 1):
                widened[total + n] += count
        counts = widened
    top = len(counts) - 1 if n_cap is None else min(n_cap, len(counts) - 1)
    return {N: counts[N] for N in range(top + 1)}


def _compositions(total: int, parts: int, n_max: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    low = max(0, total - n_max * (parts - 1))
    for first in range(low, min(n_max, total) + 1):
        for rest in _compositions(total - first, parts - 1, n_max):
            yield (first,) + rest


class TruncatedBasis:
    """Occupation-number basis with a per-site cutoff, organised into number sectors.

    ``sites`` selects the lattice sites the basis covers (all of them by default), which is how
    the reduced bases of a bipartition are built. Within a sector, vectors are lexicographic.
    """

    def __init__(
        self,
        lattice: models.LatticeSpec,
        n_max: int,
        n_cap: Optional[int] = None,
        *,
        sites: Optional[Sequence[int]] = None,
        dimension_guard: int = DEFAULT_DIMENSION_GUARD,
    ) -> None:
        if n_max < 1:
            raise ValueError(f"per-site cutoff n_max must be >= 1, got {n_max}")
        if n_cap is not None and n_cap < 0:
            raise ValueError(f"global cap must be >= 0, got {n_cap}")
        self.lattice = lattice
        self.n_max = int(n_max)
        self.n_cap = None if n_cap is None else int(n_cap)
        self.dimension_guard = int(dimension_guard)
        self.sites: Tuple[int, ...] = tuple(range(lattice.n_sites)) if sites is None else tuple(sites)
        if not self.sites:
            raise ValueError("a basis needs at least one site")
        self._position = {site: pos for pos, site in enumerate(self.sites)}

        width = len(self.sites)
        if (self.n_max + 1) ** width >= 2**62:
            raise ValueError("basis too wide to index occupation vectors with 64-bit codes")
        dims = sector_dimensions(width, self.n_max, self.n_cap)
        largest = max(dims.values())
        if largest > self.dimension_guard:
            raise DimensionGuardError(
                f"largest sector has {largest} states, above the dimension guard {self.dimension_guard}"
            )

        self._radix = (self.n_max + 1) ** np.arange(width - 1, -1, -1, dtype=np.int64)
        self.sectors: Dict[int, np.ndarray] = {}
        self._codes: Dict[int, np.ndarray] = {}
        self.offsets: Dict[int, int] = {}
        offset = 0
        for N, dim in dims.items():
            occupations = np.array(list(_compositions(N, width, self.n_max)), dtype=np.int64).reshape(dim, width)
            self.sectors[N] = occupations
            self._codes[N] = occupations @ self._radix
            self.offsets[N] = offset
            offset += dim
        self.dimension = offset
        logger.debug("basis over %d sites, n_max=%d, cap=%s: %d states", width, self.n_max, self.n_cap, offset)

    @property
    def numbers(self) -> List[int]:
        return sorted(self.sectors)

    def sector_dimension(self, N: int) -> int:
        occupations = self.sectors.get(N)
        return 0 if occupations is None else occupations.shape[0]

    def sector_dimensions(self) -> Dict[int, int]:
        return {N: occ.shape[0] for N, occ in self.sectors.items()}

    def position(self, site: SiteRef) -> int:
        index = resolve_site(self.lattice, site)
        if index not in self._position:
            raise ValueError(f"site {site} is not covered by this basis")
        return self._position[index]

    def covers(self, sites: Iterable[int]) -> bool:
        return all(site in self._position for site in sites)

    def index_in_sector(self, N: int, occupations: np.ndarray) -> np.ndarray:
        codes = np.asarray(occupations, dtype=np.int64).reshape(-1, len(self.sites)) @ self._radix
        table = self._codes[N]
        found = np.searchsorted(table, codes)
        if np.any(found >= table.size) or np.any(table[np.minimum(found, table.size - 1)] != codes):
            raise KeyError(f"occupation vector not present in sector {N}")
        return found

    def global_index(self, occupations: np.ndarray) -> np.ndarray:
        occupations = np.asarray(occupations, dtype=np.int64).reshape(-1, len(self.sites))
        totals = occupations.sum(axis=1)
        result = np.empty(occupations.shape[0], dtype=np.int64)
        for N in np.unique(totals):
            rows = totals == N
            result[rows] = self.offsets[int(N)] + self.index_in_sector(int(N), occupations[rows])
        return result

    def restrict(self, sites: Sequence[int]) -> "TruncatedBasis":
        return TruncatedBasis(
            self.lattice,
            self.n_max,
            self.n_cap,
            sites=sites,
            dimension_guard=self.dimension_guard,
        )


def build_basis(
    lattice: models.LatticeSpec,
    n_max: int,
    N_cap: Optional[int] = None,
    *,
    dimension_guard: int = DEFAULT_DIMENSION_GUARD,
) -> TruncatedBasis:
    return TruncatedBasis(lattice, n_max, N_cap, dimension_guard=dimension_guard)


def resolve_site(lattice: models.LatticeSpec, site: SiteRef) -> int:
    if isinstance(site, (int, np.integer)):
        if not 0 <= int(site) < lattice.n_sites:
            raise ValueError(f"site index {site} outside 0..{lattice.n_sites - 1}")
        return int(site)
    return lattice.index_of(tuple(site))


class SparseOperator:
    """Operator stored as sparse blocks keyed by (output sector, input sector)."""

    def __init__(
        self,
        basis: TruncatedBasis,
        blocks: Dict[BlockKey, sparse.spmatrix],
        support: Iterable[int] = (),
    ) -> None:
        self.basis = basis
        self.blocks: Dict[BlockKey, sparse.csr_matrix] = {key: sparse.csr_matrix(block) for key, block in blocks.items()}
        self.support: FrozenSet[int] = frozenset(support)

    @classmethod
    def zero(cls, basis: TruncatedBasis) -> "SparseOperator":
        return cls(basis, {})

    @classmethod
    def identity(cls, basis: TruncatedBasis) -> "SparseOperator":
        blocks = {(N, N): sparse.identity(basis.sector_dimension(N), format="csr") for N in basis.numbers}
        return cls(basis, blocks)

    def _check_basis(self, other: "SparseOperator") -> None:
        if other.basis is not self.basis:
            raise ValueError("operators live on different bases")

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check_basis(other)
        blocks = dict(self.blocks)
        for key, block in other.blocks.items():
            blocks[key] = blocks[key] + block if key in blocks else block
        return SparseOperator(self.basis, blocks, self.support | other.support)

    def __neg__(self) -> "SparseOperator":
        return self * -1.0

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "SparseOperator":
        return SparseOperator(self.basis, {key: block * scalar for key, block in self.blocks.items()}, self.support)

    __rmul__ = __mul__

    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._check_basis(other)
        blocks: Dict[BlockKey, sparse.csr_matrix] = {}
        for (out, mid), left in self.blocks.items():
            for (mid_other, inp), right in other.blocks.items():
                if mid != mid_other:
                    continue
                product = left @ right
                key = (out, inp)
                blocks[key] = blocks[key] + product if key in blocks else product
        return SparseOperator(self.basis, blocks, self.support | other.support)

    def adjoint(self) -> "SparseOperator":
        blocks = {(inp, out): block.conj().T.tocsr() for (out, inp), block in self.blocks.items()}
        return SparseOperator(self.basis, blocks, self.support)

    @property
    def is_number_conserving(self) -> bool:
        return all(out == inp for out, inp in self.blocks)

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        adjoint = self.adjoint()
        for key in set(self.blocks) | set(adjoint.blocks):
            difference = self.sector_block(*key) - adjoint.sector_block(*key)
            if difference.size and np.max(np.abs(difference)) > tol:
                return False
        return True

    def sector_block(self, out: int, inp: Optional[int] = None) -> np.ndarray:
        inp = out if inp is None else inp
        block = self.blocks.get((out, inp))
        if block is None:
            return np.zeros((self.basis.sector_dimension(out), self.basis.sector_dimension(inp)))
        return block.toarray()

    def to_dense(self) -> np.ndarray:
        dim = self.basis.dimension
        dtype = np.result_type(*[block.dtype for block in self.blocks.values()]) if self.blocks else float
        matrix = np.zeros((dim, dim), dtype=dtype)
        for (out, inp), block in self.blocks.items():
            r0, c0 = self.basis.offsets[out], self.basis.offsets[inp]
            matrix[r0 : r0 + block.shape[0], c0 : c0 + block.shape[1]] += block.toarray()
        return matrix


def _diagonal_operator(
    basis: TruncatedBasis,
    values: Callable[[np.ndarray], np.ndarray],
    support: Iterable[int],
) -> SparseOperator:
    blocks = {(N, N): sparse.diags(values(occ).astype(float), format="csr") for N, occ in basis.sectors.items()}
    return SparseOperator(basis, blocks, support)


def _annihilation(basis: TruncatedBasis, site: int) -> SparseOperator:
    pos = basis.position(site)
    blocks: Dict[BlockKey, sparse.csr_matrix] = {}
    for N, occ in basis.sectors.items():
        if N - 1 not in basis.sectors:
            continue
        source = np.nonzero(occ[:, pos] > 0)[0]
        target = occ[source].copy()
        target[:, pos] -= 1
        rows = basis.index_in_sector(N - 1, target)
        data = np.sqrt(occ[source, pos].astype(float))
        shape = (basis.sector_dimension(N - 1), occ.shape[0])
        blocks[(N - 1, N)] = sparse.csr_matrix((data, (rows, source)), shape=shape)
    return SparseOperator(basis, blocks, {site})


def site_operator(
    basis: TruncatedBasis,
    x: SiteRef,
    kind: Union[SiteOperatorKind, str],
) -> SparseOperator:
    """a_x, a_x^dagger or n_x. On the truncated space a_x^dagger a_x equals n_x exactly."""
    if isinstance(kind, str):
        kind = SiteOperatorKind.from_string(kind)
    site = resolve_site(basis.lattice, x)
    pos = basis.position(site)
    if kind is SiteOperatorKind.NUMBER:
        return _diagonal_operator(basis, lambda occ: occ[:, pos], {site})
    annihilate = _annihilation(basis, site)
    if kind is SiteOperatorKind.ANNIHILATE:
        return annihilate
    return annihilate.adjoint()


def hopping_operator(basis: TruncatedBasis, x: SiteRef, y: SiteRef) -> SparseOperator:
    """a_x^dagger a_y with matrix elements sqrt(n_y (n_x + 1))."""
    sx, sy = resolve_site(basis.lattice, x), resolve_site(basis.lattice, y)
    if sx == sy:
        raise ValueError("hopping needs two distinct sites")
    px, py = basis.position(sx), basis.position(sy)
    blocks: Dict[BlockKey, sparse.csr_matrix] = {}
    for N, occ in basis.sectors.items():
        source = np.nonzero((occ[:, py] > 0) & (occ[:, px] < basis.n_max))[0]
        target = occ[source].copy()
        target[:, py] -= 1
        target[:, px] += 1
        rows = basis.index_in_sector(N, target)
        data = np.sqrt((occ[source, py] * (occ[source, px] + 1)).astype(float))
        blocks[(N, N)] = sparse.csr_matrix((data, (rows, source)), shape=(occ.shape[0], occ.shape[0]))
    return SparseOperator(basis, blocks, {sx, sy})


def number_operator(basis: TruncatedBasis, sites: Optional[Iterable[int]] = None) -> SparseOperator:
    chosen = basis.sites if sites is None else tuple(sites)
    positions = [basis.position(site) for site in chosen]
    return _diagonal_operator(basis, lambda occ: occ[:, positions].sum(axis=1), chosen)


def interaction_operator(basis: TruncatedBasis, U: float, sites: Optional[Iterable[int]] = None) -> SparseOperator:
    """W = (U/2) sum_x n_x (n_x - 1)."""
    chosen = basis.sites if sites is None else tuple(sites)
    positions = [basis.position(site) for site in chosen]

    def values(occ: np.ndarray) -> np.ndarray:
        local = occ[:, positions]
        return 0.5 * U * (local * (local - 1)).sum(axis=1)

    return _diagonal_operator(basis, values, chosen)


def _hopping_sum(basis: TruncatedBasis, bonds: Iterable[Tuple[int, int, int]], J: float) -> SparseOperator:
    total = SparseOperator.zero(basis)
    for x, y, weight in bonds:
        if not basis.covers((x, y)):
            continue
        term = hopping_operator(basis, x, y) + hopping_operator(basis, y, x)
        total = total + term * (-J * weight)
    return total


def _check_couplings(J: float, U: Optional[float] = None) -> None:
    if J < 0:
        raise ValueError(
            "J < 0 is not supported; the sign can be removed by the gauge transformation "
            "a_x -> -a_x on every second site, which needs even L and is left to the caller"
        )
    if U is not None and U <= 0:
        raise ValueError(f"on-site repulsion U must be > 0, got {U}")


def assemble_bose_hubbard(basis: TruncatedBasis, J: float, U: float, mu: float) -> SparseOperator:
    """H = -J sum_{x~y} (a_x^dagger a_y + h.c.) + (U/2) sum n_x(n_x - 1) - mu N."""
    _check_couplings(J, U)
    hopping = _hopping_sum(basis, basis.lattice.weighted_bonds(), J)
    return hopping + interaction_operator(basis, U) - number_operator(basis) * mu


class Decomposition(NamedTuple):
    H_A: SparseOperator
    H_B: SparseOperator
    H_boundary: SparseOperator


def assemble_decomposition(
    basis: TruncatedBasis,
    bipartition: models.Bipartition,
    J: float,
    U: float,
    mu: float,
) -> Decomposition:
    _check_couplings(J, U)
    a_set, b_set = set(bipartition.A_sites), set(bipartition.B_sites)

    def region(sites: set) -> SparseOperator:
        bonds = [(x, y, w) for x, y, w in basis.lattice.weighted_bonds() if x in sites and y in sites]
        ordered = sorted(sites)
        onsite = interaction_operator(basis, U, ordered) - number_operator(basis, ordered) * mu
        return _hopping_sum(basis, bonds, J) + onsite

    boundary_bonds = zip(
        (x for x, _ in bipartition.boundary_bonds),
        (y for _, y in bipartition.boundary_bonds),
        bipartition.boundary_weights,
    )
    boundary = _hopping_sum(basis, boundary_bonds, J)
    return Decomposition(region(a_set), region(b_set), boundary)


def assemble_free(basis: TruncatedBasis, J: float, gamma: float) -> SparseOperator:
    """H_0 + gamma N, with H_0 the kinetic term shifted by 2dJ N so its one-particle block is J(-Delta)."""
    _check_couplings(J)
    if gamma <= 0:
        raise ValueError(f"chemical potential shift gamma must be > 0, got {gamma}")
    hopping = _hopping_sum(basis, basis.lattice.weighted_bonds(), J)
    return hopping + number_operator(basis) * (2.0 * basis.lattice.d * J + gamma)


def cauchy_schwarz_pair(basis: TruncatedBasis, x: SiteRef, y: SiteRef) -> Tuple[SparseOperator, SparseOperator]:
    """n_x + n_y -/+ (a_x^dagger a_y + a_y^dagger a_x); both are (a_x -/+ a_y)^dagger (a_x -/+ a_y)."""
    sx, sy = resolve_site(basis.lattice, x), resolve_site(basis.lattice, y)
    numbers = number_operator(basis, (sx, sy))
    hop = hopping_operator(basis, sx, sy) + hopping_operator(basis, sy, sx)
    return numbers - hop, numbers + hop


def permute_sites(op: SparseOperator, permutation: Sequence[int]) -> SparseOperator:
    """T O T^dagger for the site relabelling i -> permutation[i]."""
    basis = op.basis
    permutation = np.asarray(permutation)
    if not basis.covers(permutation[list(basis.sites)]):
        raise ValueError("permutation leaves the sites covered by the basis")
    moved_positions = [basis.position(int(permutation[site])) for site in basis.sites]

    carriers: Dict[int, sparse.csr_matrix] = {}
    for N, occ in basis.sectors.items():
        moved = np.empty_like(occ)
        moved[:, moved_positions] = occ
        rows = basis.index_in_sector(N, moved)
        dim = occ.shape[0]
        carriers[N] = sparse.csr_matrix((np.ones(dim), (rows, np.arange(dim))), shape=(dim, dim))

    blocks = {(out, inp): carriers[out] @ block @ carriers[inp].T for (out, inp), block in op.blocks.items()}
    support = {int(permutation[site]) for site in op.support}
    return SparseOperator(basis, blocks, support)


__all__ = [
    "DEFAULT_DIMENSION_GUARD",
    "Decomposition",
    "DimensionGuardError",
    "SiteOperatorKind",
    "SparseOperator",
    "TruncatedBasis",
    "assemble_bose_hubbard",
    "assemble_decomposition",
    "assemble_free",
    "build_basis",
    "cauchy_schwarz_pair",
    "hopping_operator",
    "interaction_operator",
    "number_operator",
    "permute_sites",
    "resolve_site",
    "sector_dimensions",
    "site_operator",
]
