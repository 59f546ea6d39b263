import numpy as np
import pytest
from scipy import linalg

from arealaw_logic.fock import (
    DimensionGuardError,
    SiteOperatorKind,
    TruncatedBasis,
    assemble_bose_hubbard,
    assemble_decomposition,
    assemble_free,
    build_basis,
    cauchy_schwarz_pair,
    hopping_operator,
    interaction_operator,
    number_operator,
    permute_sites,
    sector_dimensions,
    site_operator,
)
from arealaw_logic.lattice import bipartition, build_lattice, laplacian_matrix, translation
from tests.dense_oracle import dense_hamiltonian


def test_sector_dimensions_of_small_boxes():
    assert sector_dimensions(2, 1) == {0: 1, 1: 2, 2: 1}
    assert sector_dimensions(3, 2) == {0: 1, 1: 3, 2: 6, 3: 7, 4: 6, 5: 3, 6: 1}
    assert sector_dimensions(3, 2, n_cap=2) == {0: 1, 1: 3, 2: 6}


def test_basis_dimension_is_product_of_local_dimensions():
    basis = build_basis(build_lattice(1, 4), 2)

    assert basis.dimension == 3**4
    assert basis.numbers == list(range(9))
    assert sum(basis.sector_dimensions().values()) == 81


def test_sector_vectors_are_lexicographic():
    basis = build_basis(build_lattice(1, 2), 1)

    assert basis.sectors[1].tolist() == [[0, 1], [1, 0]]
    assert basis.offsets == {0: 0, 1: 1, 2: 3}


def test_global_index_matches_sector_offsets():
    basis = build_basis(build_lattice(1, 3), 2)
    occupations = np.array([[0, 0, 0], [0, 0, 1], [2, 2, 2], [1, 1, 0]])
    indices = basis.global_index(occupations)

    assert indices[0] == 0
    assert indices[1] == 1
    assert indices[2] == basis.dimension - 1
    assert np.array_equal(basis.sectors[2][indices[3] - basis.offsets[2]], [1, 1, 0])


def test_global_cap_drops_high_sectors():
    basis = build_basis(build_lattice(1, 4), 3, 5)

    assert max(basis.numbers) == 5
    assert basis.dimension == sum(sector_dimensions(4, 3, 5).values())


def test_dimension_guard_raises_before_allocation():
    with pytest.raises(DimensionGuardError, match="dimension guard"):
        build_basis(build_lattice(1, 6), 3, dimension_guard=100)


def test_basis_rejects_invalid_cutoffs():
    lattice = build_lattice(1, 3)
    with pytest.raises(ValueError):
        build_basis(lattice, 0)
    with pytest.raises(ValueError):
        build_basis(lattice, 2, -1)


def test_single_site_operators():
    basis = TruncatedBasis(build_lattice(1, 2), 3, sites=[0])
    a = site_operator(basis, 0, SiteOperatorKind.ANNIHILATE).to_dense()
    a_dagger = site_operator(basis, 0, "create").to_dense()
    n = site_operator(basis, (1,), "number").to_dense()

    assert np.allclose(a, np.diag(np.sqrt([1.0, 2.0, 3.0]), 1))
    assert np.allclose(a_dagger, a.T)
    assert np.allclose(a_dagger @ a, n)
    assert np.allclose(np.diag(n), [0, 1, 2, 3])


def test_creation_at_the_cutoff_annihilates():
    basis = TruncatedBasis(build_lattice(1, 2), 2, sites=[0])
    a_dagger = site_operator(basis, 0, SiteOperatorKind.CREATE).to_dense()

    assert np.allclose(a_dagger[:, 2], 0.0)
    commutator = a_dagger.T @ a_dagger - a_dagger @ a_dagger.T
    assert np.allclose(np.diag(commutator), [1.0, 1.0, -2.0])


def test_site_operator_kind_from_string():
    assert SiteOperatorKind.from_string(" Number ") is SiteOperatorKind.NUMBER
    with pytest.raises(ValueError):
        SiteOperatorKind.from_string("parity")


def test_hopping_matrix_elements():
    basis = build_basis(build_lattice(1, 2), 2)
    hop = hopping_operator(basis, 0, 1)
    block = hop.sector_block(2)
    row = basis.index_in_sector(2, np.array([[2, 0]]))[0]
    col = basis.index_in_sector(2, np.array([[1, 1]]))[0]

    assert block[row, col] == pytest.approx(np.sqrt(2.0))
    assert hop.is_number_conserving
    with pytest.raises(ValueError):
        hopping_operator(basis, 0, 0)


def test_two_site_hamiltonian_single_particle_sector():
    # Both wrap-around bonds join sites 0 and 1, so the hopping amplitude is 2J and the
    # one-particle energies are +-2, not +-1.
    lattice = build_lattice(1, 2)
    basis = build_basis(lattice, 1)
    H = assemble_bose_hubbard(basis, 1.0, 1.0, 0.0)
    energies = linalg.eigvalsh(H.sector_block(1))

    assert energies == pytest.approx([-2.0, 2.0])
    assert energies == pytest.approx(np.linalg.eigvalsh(laplacian_matrix(lattice)) - 2.0)


def test_hamiltonian_is_hermitian_and_conserves_number():
    basis = build_basis(build_lattice(2, 2), 2)
    H = assemble_bose_hubbard(basis, 0.7, 1.3, 0.4)

    assert H.is_number_conserving
    assert H.is_hermitian()


def test_zero_hopping_is_diagonal():
    basis = build_basis(build_lattice(1, 3), 3)
    H = assemble_bose_hubbard(basis, 0.0, 2.0, 0.5).to_dense()
    occupations = np.vstack([basis.sectors[N] for N in basis.numbers])
    expected = (occupations * (occupations - 1)).sum(axis=1) - 0.5 * occupations.sum(axis=1)

    assert np.allclose(H, np.diag(expected))


@pytest.mark.parametrize("d,L,n_max", [(1, 3, 2), (1, 4, 2), (2, 2, 1), (1, 2, 3)])
def test_sparse_spectrum_matches_dense_kronecker_hamiltonian(d, L, n_max):
    lattice = build_lattice(d, L)
    H = assemble_bose_hubbard(build_basis(lattice, n_max), 1.0, 1.5, 0.3)
    dense = dense_hamiltonian(lattice, n_max, 1.0, 1.5, 0.3)

    assert np.sort(linalg.eigvalsh(H.to_dense())) == pytest.approx(linalg.eigvalsh(dense), abs=1e-10)


def test_negative_hopping_points_to_the_gauge_transformation():
    basis = build_basis(build_lattice(1, 4), 1)
    with pytest.raises(ValueError, match="gauge"):
        assemble_bose_hubbard(basis, -1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        assemble_bose_hubbard(basis, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("d,L,L_A", [(1, 4, 2), (1, 2, 1), (2, 3, 1)])
def test_decomposition_sums_to_the_hamiltonian(d, L, L_A):
    lattice = build_lattice(d, L)
    basis = build_basis(lattice, 2, 4)
    H = assemble_bose_hubbard(basis, 0.8, 1.2, 0.6)
    parts = assemble_decomposition(basis, bipartition(lattice, L_A), 0.8, 1.2, 0.6)

    total = parts.H_A + parts.H_B + parts.H_boundary
    assert np.allclose(total.to_dense(), H.to_dense())
    assert parts.H_A.support <= set(bipartition(lattice, L_A).A_sites)


def test_free_hamiltonian_one_particle_block_is_shifted_laplacian():
    lattice = build_lattice(1, 5)
    basis = build_basis(lattice, 2)
    free = assemble_free(basis, 0.5, 1.5)
    expected = 0.5 * laplacian_matrix(lattice) + 1.5 * np.eye(5)

    # N = 1 vectors run from a particle on the last site to one on the first.
    assert np.allclose(free.sector_block(1), expected[::-1, ::-1])
    assert free.sector_block(0) == pytest.approx(np.zeros((1, 1)))


def test_free_hamiltonian_rejects_nonpositive_gamma():
    with pytest.raises(ValueError):
        assemble_free(build_basis(build_lattice(1, 3), 1), 1.0, 0.0)


def test_number_and_interaction_operators():
    basis = build_basis(build_lattice(1, 3), 2)
    occupations = np.vstack([basis.sectors[N] for N in basis.numbers])
    W = interaction_operator(basis, 3.0).to_dense()

    assert np.allclose(np.diag(number_operator(basis).to_dense()), occupations.sum(axis=1))
    assert np.allclose(np.diag(W), 1.5 * (occupations * (occupations - 1)).sum(axis=1))
    assert np.allclose(np.diag(number_operator(basis, [2]).to_dense()), occupations[:, 2])


@pytest.mark.parametrize("d,L,n_max", [(1, 4, 3), (2, 2, 2)])
def test_cauchy_schwarz_operators_are_positive(d, L, n_max):
    lattice = build_lattice(d, L)
    basis = build_basis(lattice, n_max)
    for x, y in bipartition(lattice, L // 2).boundary_bonds:
        for operator in cauchy_schwarz_pair(basis, x, y):
            lowest = min(linalg.eigvalsh(operator.sector_block(N))[0] for N in basis.numbers)
            assert lowest >= -1e-10


def test_hamiltonian_is_translation_covariant():
    lattice = build_lattice(2, 3)
    basis = build_basis(lattice, 1)
    H = assemble_bose_hubbard(basis, 1.0, 1.0, 0.5)
    for axis in range(2):
        moved = permute_sites(H, translation(lattice, axis))
        assert np.allclose(moved.to_dense(), H.to_dense())


def test_permuting_a_site_operator_moves_its_support():
    lattice = build_lattice(1, 4)
    basis = build_basis(lattice, 2)
    n0 = site_operator(basis, 0, SiteOperatorKind.NUMBER)
    moved = permute_sites(n0, translation(lattice, 0))

    assert moved.support == frozenset({1})
    assert np.allclose(moved.to_dense(), site_operator(basis, 1, SiteOperatorKind.NUMBER).to_dense())
