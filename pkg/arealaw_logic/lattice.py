"""Periodic hypercubic lattices, slab bipartitions and the chain Laplacian spectrum."""
from __future__ import annotations

import itertools
import logging
from collections import Counter
from typing import Dict, List, Tuple

import numpy as np

from . import models

logger = logging.getLogger(__name__)


def build_lattice(d: int, L: int) -> models.LatticeSpec:
    """Box {1..L}^d with periodic wrap.

    Bonds are unordered pairs found by stepping +1 along every axis. For L = 2 the +1 and -1
    neighbours coincide, so each pair is found twice; it is stored once with weight 2.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got d={d}")
    if L < 2:
        raise ValueError(f"side length must be >= 2, got L={L}")

    sites = tuple(itertools.product(range(1, L + 1), repeat=d))
    index = {site: i for i, site in enumerate(sites)}
    counts: Counter = Counter()
    for i, site in enumerate(sites):
        for axis in range(d):
            neighbour = list(site)
            neighbour[axis] = neighbour[axis] % L + 1
            j = index[tuple(neighbour)]
            counts[(min(i, j), max(i, j))] += 1

    bonds = tuple(sorted(counts))
    weights = tuple(counts[bond] for bond in bonds)
    logger.debug("built lattice d=%d L=%d with %d sites, %d bonds", d, L, len(sites), len(bonds))
    return models.LatticeSpec(d=d, L=L, sites=sites, bonds=bonds, bond_weights=weights)


def bipartition(lattice: models.LatticeSpec, L_A: int) -> models.Bipartition:
    if not 1 <= L_A <= lattice.L - 1:
        raise ValueError(f"slab width L_A must lie in 1..{lattice.L - 1}, got {L_A}")

    a_sites = tuple(i for i, site in enumerate(lattice.sites) if site[0] <= L_A)
    a_set = set(a_sites)
    b_sites = tuple(i for i in range(lattice.n_sites) if i not in a_set)
    boundary: List[Tuple[int, int]] = []
    weights: List[int] = []
    for x, y, weight in lattice.weighted_bonds():
        if (x in a_set) != (y in a_set):
            boundary.append((x, y))
            weights.append(weight)
    return models.Bipartition(
        lattice=lattice,
        L_A=L_A,
        A_sites=a_sites,
        B_sites=b_sites,
        boundary_bonds=tuple(boundary),
        boundary_weights=tuple(weights),
    )


def adjacency_matrix(lattice: models.LatticeSpec) -> np.ndarray:
    n = lattice.n_sites
    adjacency = np.zeros((n, n))
    for x, y, weight in lattice.weighted_bonds():
        adjacency[x, y] += weight
        adjacency[y, x] += weight
    return adjacency


def laplacian_matrix(lattice: models.LatticeSpec) -> np.ndarray:
    """-Delta = 2d I - A; positive semidefinite with zero row sums."""
    return 2.0 * lattice.d * np.eye(lattice.n_sites) - adjacency_matrix(lattice)


def chain_spectrum(L: int) -> models.SpectrumTable:
    """Closed-form eigenpairs of -Delta on the periodic chain of length L.

    Index 1 is the constant vector. For k = 1..floor((L-1)/2), index 2k carries the sine and
    index 2k+1 the cosine vector of 4 sin^2(k pi / L). For even L, index L carries the
    alternating vector, which is the eigenvalue 4 sin^2(k pi / L) at k = L/2.
    """
    if L < 2:
        raise ValueError(f"side length must be >= 2, got L={L}")

    i = np.arange(1, L + 1)
    eigenvalues = np.zeros(L)
    vectors = np.zeros((L, L))
    labels: List[str] = [""] * L

    vectors[:, 0] = L**-0.5
    labels[0] = "constant"
    for k in range(1, (L - 1) // 2 + 1):
        value = 4.0 * np.sin(k * np.pi / L) ** 2
        phase = np.pi * k * (2 * i - 1) / L
        eigenvalues[2 * k - 1] = value
        vectors[:, 2 * k - 1] = np.sqrt(2.0 / L) * np.sin(phase)
        labels[2 * k - 1] = f"sin k={k}"
        eigenvalues[2 * k] = value
        vectors[:, 2 * k] = np.sqrt(2.0 / L) * np.cos(phase)
        labels[2 * k] = f"cos k={k}"
    if L % 2 == 0:
        eigenvalues[L - 1] = 4.0
        vectors[:, L - 1] = L**-0.5 * (-1.0) ** i
        labels[L - 1] = "alternating"

    return models.SpectrumTable(L=L, eigenvalues=eigenvalues, eigenvectors=vectors, labels=tuple(labels))


def tensor_spectrum(L: int, d: int) -> np.ndarray:
    """All sums lambda_{i_1} + ... + lambda_{i_d}, sorted."""
    chain = chain_spectrum(L).eigenvalues
    total = np.zeros(1)
    for _ in range(d):
        total = np.add.outer(total, chain).ravel()
    return np.sort(total)


def spectrum_residuals(table: models.SpectrumTable) -> Dict[str, float]:
    """Orthonormality and eigen-equation residuals against the ring Laplacian."""
    laplacian = laplacian_matrix(build_lattice(1, table.L))
    vectors = table.eigenvectors
    gram = vectors.T @ vectors - np.eye(table.L)
    eigen = laplacian @ vectors - vectors * table.eigenvalues
    direct = np.linalg.eigvalsh(laplacian)
    return {
        "orthonormality": float(np.max(np.abs(gram))),
        "eigen_equation": float(np.max(np.abs(eigen))),
        "direct_diagonalization": float(np.max(np.abs(np.sort(table.eigenvalues) - direct))),
    }


def translation(lattice: models.LatticeSpec, axis: int, shift: int = 1) -> np.ndarray:
    """Permutation p with site p[i] = site i shifted by ``shift`` along ``axis``."""
    if not 0 <= axis < lattice.d:
        raise ValueError(f"axis must lie in 0..{lattice.d - 1}, got {axis}")
    index = {site: i for i, site in enumerate(lattice.sites)}
    permutation = np.empty(lattice.n_sites, dtype=int)
    for i, site in enumerate(lattice.sites):
        moved = list(site)
        moved[axis] = (moved[axis] - 1 + shift) % lattice.L + 1
        permutation[i] = index[tuple(moved)]
    return permutation


__all__ = [
    "adjacency_matrix",
    "bipartition",
    "build_lattice",
    "chain_spectrum",
    "laplacian_matrix",
    "spectrum_residuals",
    "tensor_spectrum",
    "translation",
]
