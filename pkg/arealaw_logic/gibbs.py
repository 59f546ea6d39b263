"""Thermal states on truncated spaces and their information-theoretic functionals."""
from __future__ import annotations

import logging
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from . import models
from .fock import SparseOperator, TruncatedBasis

logger = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-14


class NumericalError(RuntimeError):
    """Raised when a numerical kernel fails to produce a usable result."""


class DensityMatrix:
    """Positive unit-trace operator stored per number sector through its eigenpairs."""

    def __init__(
        self,
        basis: TruncatedBasis,
        eigenvalues: Dict[int, np.ndarray],
        eigenvectors: Dict[int, np.ndarray],
        *,
        log_partition: Optional[float] = None,
    ) -> None:
        self.basis = basis
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.log_partition = log_partition
        self._blocks: Dict[int, np.ndarray] = {}

    @classmethod
    def from_blocks(cls, basis: TruncatedBasis, blocks: Dict[int, np.ndarray]) -> "DensityMatrix":
        eigenvalues: Dict[int, np.ndarray] = {}
        eigenvectors: Dict[int, np.ndarray] = {}
        for N, block in blocks.items():
            values, vectors = _hermitian_eigh(block)
            if values.size and values.min() < -1e-12:
                logger.warning("sector %d has eigenvalue %.3e below zero; clipped", N, values.min())
            eigenvalues[N] = np.clip(values, 0.0, None)
            eigenvectors[N] = vectors
        state = cls(basis, eigenvalues, eigenvectors)
        state._blocks = {N: np.asarray(block) for N, block in blocks.items()}
        return state

    @property
    def sectors(self):
        return sorted(self.eigenvalues)

    def trace(self) -> float:
        return float(sum(values.sum() for values in self.eigenvalues.values()))

    def spectrum(self) -> np.ndarray:
        if not self.eigenvalues:
            return np.zeros(0)
        return np.concatenate([self.eigenvalues[N] for N in self.sectors])

    def block(self, N: int) -> np.ndarray:
        if N not in self._blocks:
            if N not in self.eigenvalues:
                dim = self.basis.sector_dimension(N)
                return np.zeros((dim, dim))
            vectors = self.eigenvectors[N]
            self._blocks[N] = (vectors * self.eigenvalues[N]) @ vectors.conj().T
        return self._blocks[N]

    def to_dense(self) -> np.ndarray:
        blocks = [self.block(N) for N in self.basis.numbers]
        dtype = np.result_type(*[block.dtype for block in blocks])
        matrix = np.zeros((self.basis.dimension, self.basis.dimension), dtype=dtype)
        for N, block in zip(self.basis.numbers, blocks):
            start = self.basis.offsets[N]
            matrix[start : start + block.shape[0], start : start + block.shape[0]] = block
        return matrix


State = Union[DensityMatrix, np.ndarray]


def _hermitian_eigh(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return linalg.eigh(matrix)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"Hermitian eigendecomposition did not converge: {exc}") from exc


def gibbs_state(H: SparseOperator, beta: float) -> DensityMatrix:
    """e^{-beta H} / Z, weights shifted by the global ground energy before exponentiation."""
    if beta <= 0:
        raise ValueError(f"inverse temperature must be > 0, got {beta}")
    if not H.is_number_conserving:
        raise ValueError("Gibbs states are built sector by sector; H must commute with N")

    energies: Dict[int, np.ndarray] = {}
    vectors: Dict[int, np.ndarray] = {}
    for N in H.basis.numbers:
        energies[N], vectors[N] = _hermitian_eigh(H.sector_block(N))
        logger.debug("sector %d diagonalised (dim %d)", N, energies[N].size)

    ground = min(float(values.min()) for values in energies.values())
    weights = {N: np.exp(-beta * (values - ground)) for N, values in energies.items()}
    shifted_partition = float(sum(w.sum() for w in weights.values()))
    probabilities = {N: w / shifted_partition for N, w in weights.items()}
    log_partition = -beta * ground + np.log(shifted_partition)
    return DensityMatrix(H.basis, probabilities, vectors, log_partition=float(log_partition))


def reduced_states(
    rho: DensityMatrix,
    bipartition: models.Bipartition,
) -> Tuple[DensityMatrix, DensityMatrix]:
    return partial_trace(rho, bipartition, "A"), partial_trace(rho, bipartition, "B")


def partial_trace(rho: DensityMatrix, bipartition: models.Bipartition, keep: str) -> DensityMatrix:
    keep = keep.upper().strip()
    if keep not in ("A", "B"):
        raise ValueError(f"keep must be 'A' or 'B', got {keep}")
    basis = rho.basis
    kept_sites = bipartition.A_sites if keep == "A" else bipartition.B_sites
    traced_sites = bipartition.B_sites if keep == "A" else bipartition.A_sites
    if not basis.covers(kept_sites) or not basis.covers(traced_sites):
        raise ValueError("density matrix is not defined on the full bipartite basis")

    reduced_basis = basis.restrict(kept_sites)
    kept_pos = [basis.position(site) for site in kept_sites]
    traced_pos = [basis.position(site) for site in traced_sites]
    radix = (basis.n_max + 1) ** np.arange(len(traced_pos) - 1, -1, -1, dtype=np.int64)

    blocks = {N: np.zeros((reduced_basis.sector_dimension(N),) * 2, dtype=complex) for N in reduced_basis.numbers}
    for N in rho.sectors:
        occ = basis.sectors[N]
        kept = occ[:, kept_pos]
        kept_numbers = kept.sum(axis=1)
        kept_index = np.empty(occ.shape[0], dtype=np.int64)
        for n_kept in np.unique(kept_numbers):
            rows = kept_numbers == n_kept
            kept_index[rows] = reduced_basis.index_in_sector(int(n_kept), kept[rows])
        traced_codes = occ[:, traced_pos] @ radix
        block = rho.block(N)
        _, groups = np.unique(traced_codes, return_inverse=True)
        for group in np.unique(groups):
            members = np.nonzero(groups == group)[0]
            target = int(kept_numbers[members[0]])
            idx = kept_index[members]
            blocks[target][np.ix_(idx, idx)] += block[np.ix_(members, members)]

    if all(np.allclose(block.imag, 0.0) for block in blocks.values()):
        blocks = {N: block.real for N, block in blocks.items()}
    return DensityMatrix.from_blocks(reduced_basis, blocks)


def _spectrum(rho: State) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.spectrum()
    return linalg.eigvalsh(np.asarray(rho))


def entropy(rho: State) -> float:
    """-sum p ln p over eigenvalues above the floor."""
    p = _spectrum(rho)
    p = p[p > EIGENVALUE_FLOOR]
    return float(-np.sum(p * np.log(p)))


def mutual_information(rho_AB: DensityMatrix, bipartition: models.Bipartition) -> float:
    rho_A, rho_B = reduced_states(rho_AB, bipartition)
    return entropy(rho_A) + entropy(rho_B) - entropy(rho_AB)


def expectation(O: SparseOperator, rho: State) -> float:
    """Real part of tr(O rho)."""
    if isinstance(rho, DensityMatrix):
        if O.basis is not rho.basis:
            raise ValueError("operator and state live on different bases")
        value = 0j
        for N in rho.sectors:
            block = O.blocks.get((N, N))
            if block is None:
                continue
            vectors = rho.eigenvectors[N]
            diagonal = np.einsum("ij,ij->j", vectors.conj(), block @ vectors)
            value += np.dot(rho.eigenvalues[N], diagonal)
    else:
        value = np.trace(O.to_dense() @ np.asarray(rho))
    if abs(np.imag(value)) > 1e-10:
        logger.warning("expectation value has imaginary residue %.3e", np.imag(value))
    return float(np.real(value))


def block_expectation(O: SparseOperator, blocks: Dict[int, np.ndarray]) -> float:
    """tr(O sigma) for sigma given as dense sector blocks."""
    value = 0j
    for N, sigma in blocks.items():
        block = O.blocks.get((N, N))
        if block is not None:
            value += np.trace(block @ sigma)
    return float(np.real(value))


def free_energy(H: SparseOperator, beta: float, rho: State) -> models.FreeEnergyValue:
    if beta <= 0:
        raise ValueError(f"inverse temperature must be > 0, got {beta}")
    return models.FreeEnergyValue.from_terms(expectation(H, rho), entropy(rho), beta)


def truncated_correlation(
    M_A: SparseOperator,
    M_B: SparseOperator,
    rho_AB: DensityMatrix,
    bipartition: models.Bipartition,
) -> float:
    """tr(M_A M_B rho) - tr(M_A rho) tr(M_B rho) for observables on opposite sides of the cut."""
    if not M_A.support <= set(bipartition.A_sites):
        raise ValueError("M_A must be supported on region A")
    if not M_B.support <= set(bipartition.B_sites):
        raise ValueError("M_B must be supported on region B")
    joint = expectation(M_A @ M_B, rho_AB)
    return joint - expectation(M_A, rho_AB) * expectation(M_B, rho_AB)


def trace_norm(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    return float(np.sum(linalg.svdvals(matrix)))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """||rho - sigma||_1 summed over number sectors."""
    if rho.basis is not sigma.basis:
        raise ValueError("states live on different bases")
    return float(sum(trace_norm(rho.block(N) - sigma.block(N)) for N in rho.basis.numbers))


def product_blocks(
    rho_A: DensityMatrix,
    rho_B: DensityMatrix,
    basis: TruncatedBasis,
) -> Tuple[Dict[int, np.ndarray], float]:
    """Sector blocks of rho_A (x) rho_B on ``basis`` and the weight falling outside it."""
    dense_A, dense_B = rho_A.to_dense(), rho_B.to_dense()
    pos_A = [basis.position(site) for site in rho_A.basis.sites]
    pos_B = [basis.position(site) for site in rho_B.basis.sites]
    blocks: Dict[int, np.ndarray] = {}
    kept = 0.0
    for N, occ in basis.sectors.items():
        ia = rho_A.basis.global_index(occ[:, pos_A])
        ib = rho_B.basis.global_index(occ[:, pos_B])
        block = dense_A[np.ix_(ia, ia)] * dense_B[np.ix_(ib, ib)]
        blocks[N] = block
        kept += float(np.real(np.trace(block)))
    return blocks, max(0.0, 1.0 - kept)


def tensor_product(rho_A: DensityMatrix, rho_B: DensityMatrix, basis: TruncatedBasis) -> DensityMatrix:
    blocks, leaked = product_blocks(rho_A, rho_B, basis)
    if leaked > 1e-12:
        raise ValueError(f"product state leaves the capped basis (weight {leaked:.3e} outside)")
    return DensityMatrix.from_blocks(basis, blocks)


def decoupling_distance(rho_AB: DensityMatrix, rho_A: DensityMatrix, rho_B: DensityMatrix) -> float:
    """||rho_AB - rho_A (x) rho_B||_1; product weight beyond a global cap counts in full."""
    blocks, leaked = product_blocks(rho_A, rho_B, rho_AB.basis)
    inside = sum(trace_norm(rho_AB.block(N) - blocks[N]) for N in rho_AB.basis.numbers)
    return float(inside + leaked)


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """G G^dagger / tr for a standard complex Gaussian G; full rank almost surely."""
    gaussian = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    square = gaussian @ gaussian.conj().T
    return square / np.trace(square).real


def operator_norm(O: SparseOperator) -> float:
    return float(linalg.norm(O.to_dense(), 2))


__all__ = [
    "DensityMatrix",
    "EIGENVALUE_FLOOR",
    "NumericalError",
    "block_expectation",
    "decoupling_distance",
    "entropy",
    "expectation",
    "free_energy",
    "gibbs_state",
    "mutual_information",
    "operator_norm",
    "partial_trace",
    "product_blocks",
    "random_density_matrix",
    "reduced_states",
    "tensor_product",
    "trace_distance",
    "trace_norm",
]
