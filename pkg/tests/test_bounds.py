import math

import numpy as np
import pytest

from arealaw_logic.bounds import (
    exact_observables,
    lemma1_bound,
    main_constant,
    onsite_number_slack,
    peierls_bogoliubov_check,
    prop1_bound,
    prop2_bound,
    step3_bound,
    theorem_bound,
    verify_chain,
)
from arealaw_logic.fock import assemble_bose_hubbard, assemble_decomposition, build_basis
from arealaw_logic.gibbs import free_energy, gibbs_state, reduced_states, tensor_product
from arealaw_logic.lattice import bipartition, build_lattice
from arealaw_logic.models import ChainOutcome, ChainParameters, LinkState
from arealaw_logic.quasifree import one_particle_dm, planck_estimate
from arealaw_logic.validators import LINK_KEYS
from tests.dense_oracle import dense_mutual_information


def test_prop1_bound():
    assert prop1_bound(1.0, 0.5, 4, 4.0) == pytest.approx(4.0)
    assert prop1_bound(2.0, 0.0, 8, 10.0) == 0.0


def test_main_constant_at_unit_couplings():
    assert main_constant(1.0, 1.0, 1.0, 1) == pytest.approx(106.958, abs=5e-3)
    assert main_constant(0.0, 1.0, 1.0, 1) == 0.0
    assert theorem_bound(2.0, 4, 1, 1.0, 1.0, 1.0) == pytest.approx(213.92, abs=1e-2)


def test_main_constant_rejects_bad_couplings():
    with pytest.raises(ValueError):
        main_constant(-1.0, 1.0, 1.0, 1)
    with pytest.raises(ValueError):
        main_constant(1.0, 0.0, 1.0, 1)
    with pytest.raises(ValueError):
        main_constant(1.0, 1.0, 0.0, 1)
    with pytest.raises(ValueError):
        main_constant(1.0, 1.0, 1.0, 0)


def test_main_constant_grows_with_repulsion_beyond_the_minimum():
    # With s = 2dJ + 1 + mu = 4 the U-dependence is minimal at U = 4s.
    values = [main_constant(1.0, U, 1.0, 1) for U in (16.0, 20.0, 32.0, 64.0)]

    assert values == sorted(values)
    assert main_constant(1.0, 1.0, 1.0, 1) > main_constant(1.0, 16.0, 1.0, 1)


def test_theorem_bound_scaling():
    c = main_constant(1.0, 1.0, 1.0, 2)

    assert theorem_bound(2.0, 5, 2, 1.0, 1.0, 1.0) == pytest.approx(c * 2.0 * 5)
    assert theorem_bound(0.5, 5, 2, 1.0, 1.0, 1.0) == pytest.approx(c * 5)
    assert theorem_bound(3.0, 7, 1, 1.0, 1.0, 1.0) == pytest.approx(3.0 * main_constant(1.0, 1.0, 1.0, 1))
    with pytest.raises(ValueError):
        theorem_bound(0.0, 4, 1, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("C", [0.05, 0.1, 0.5, 1.0, 2.0, 4.0])
def test_onsite_number_slack_is_nonnegative(C):
    assert min(onsite_number_slack(n, C) for n in range(1001)) >= -1e-9


def test_prop2_bound_terms():
    opdm = one_particle_dm(build_lattice(1, 4), 1.0, 3.0, 1.0)
    bound = prop2_bound(opdm, 1.0, 1.0)

    assert bound.c0 == pytest.approx(1.0 / 16.0)
    assert bound.n_free == pytest.approx(4 * opdm.g)
    assert bound.w_free == pytest.approx(0.5 * 4 * 2 * opdm.g**2)
    assert bound.shift == pytest.approx(2.0)
    offset = bound.c0 / 4 * (1 + 1 / bound.c0) ** 2 * 4
    assert bound.exact_free == pytest.approx(2 * (bound.c0 / 0.5 * (bound.w_free - 2.0 * bound.n_free) + offset))
    assert bound.relaxed >= bound.exact_free


def test_prop2_bound_rejects_bad_reference():
    lattice = build_lattice(1, 4)
    with pytest.raises(ValueError):
        prop2_bound(one_particle_dm(lattice, 1.0, 3.0, 1.0), 0.0, 1.0)
    with pytest.raises(ValueError, match="2dJ - mu"):
        prop2_bound(one_particle_dm(lattice, 1.0, 0.5, 1.0), 1.0, 1.0)


def test_step3_bound_dominates_relaxed_prop2_for_small_repulsion():
    lattice = build_lattice(1, 6)
    opdm = one_particle_dm(lattice, 1.0, 3.0, 1.0)
    estimate = planck_estimate(lattice, 1.0, 3.0, 1.0)

    for U in (0.5, 1.0, 2.0):
        assert step3_bound(estimate, lattice, U, 1.0) >= prop2_bound(opdm, U, 1.0).relaxed


def test_peierls_bogoliubov_diagonal_example():
    result = peierls_bogoliubov_check(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))

    assert result.lhs == pytest.approx(math.e / (1 + math.e))
    assert result.rhs_shifted == pytest.approx(math.e**2 / (1 + math.e**2))
    assert result.rhs_log == pytest.approx(math.log((math.e**2 + 1) / (math.e + 1)))
    assert result.lhs <= result.rhs_log <= result.rhs_shifted


def test_peierls_bogoliubov_is_invariant_under_a_shift_of_k():
    shifted = peierls_bogoliubov_check(np.diag([0.0, -1.0]), np.diag([1.0, 0.0]))

    assert shifted.lhs == pytest.approx(math.e / (1 + math.e))
    assert shifted.rhs_shifted == pytest.approx(math.e**2 / (1 + math.e**2))


def test_peierls_bogoliubov_is_tight_for_zero_perturbation():
    result = peierls_bogoliubov_check(np.diag([0.5, -1.0]), np.zeros((2, 2)))

    assert result.lhs == pytest.approx(0.0, abs=1e-14)
    assert result.rhs_log == pytest.approx(0.0, abs=1e-14)
    assert result.rhs_shifted == pytest.approx(0.0, abs=1e-14)


def test_peierls_bogoliubov_noncommuting_pair():
    K = np.array([[0.3, 1.0], [1.0, -0.7]])
    P = np.array([[2.0, -0.5j], [0.5j, -1.0]])
    result = peierls_bogoliubov_check(K, P)

    assert result.slack_log >= -1e-12
    assert result.slack_shifted >= -1e-12


def test_peierls_bogoliubov_checks_the_grading():
    K = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ValueError, match="grading"):
        peierls_bogoliubov_check(K, np.eye(2), grading=[0, 1])
    assert peierls_bogoliubov_check(K, np.eye(2), grading=[0, 0]).lhs == pytest.approx(1.0)


def test_boundary_bound_exceeds_mutual_information_by_a_free_energy_gap():
    lattice = build_lattice(1, 4)
    cut = bipartition(lattice, 2)
    basis = build_basis(lattice, 2)
    H = assemble_bose_hubbard(basis, 1.0, 1.0, 1.0)
    rho = gibbs_state(H, 1.0)
    rho_A, rho_B = reduced_states(rho, cut)
    H_boundary = assemble_decomposition(basis, cut, 1.0, 1.0, 1.0).H_boundary
    product = tensor_product(rho_A, rho_B, basis)
    mi = exact_observables(ChainParameters(d=1, L=4, L_A=2, n_max=2, beta=1.0, J=1.0, U=1.0, mu=1.0))[0]
    gap = free_energy(H, 1.0, product).value - free_energy(H, 1.0, rho).value

    assert lemma1_bound(H_boundary, rho, rho_A, rho_B, 1.0) - mi == pytest.approx(gap, abs=1e-10)
    assert gap >= 0.0


def test_chain_at_unit_couplings_holds_except_for_the_zero_mode():
    params = ChainParameters(d=1, L=4, L_A=2, n_max=3, beta=1.0, J=1.0, U=1.0, mu=1.0)
    chain = verify_chain(params)

    assert chain.report.flagged() == ["zero_mode"]
    assert chain.report.overall_status is ChainOutcome.FLAG
    assert chain.epsilon2 < chain.zero_mode_bound
    assert set(chain.report.links) == set(LINK_KEYS)
    assert chain.exact_mi == pytest.approx(
        dense_mutual_information(build_lattice(1, 4), 2, 3, 1.0, 1.0, 1.0, 1.0), abs=1e-8
    )
    assert chain.gamma == pytest.approx(3.0)
    assert chain.main_constant == pytest.approx(106.958, abs=5e-3)
    assert chain.boundary_bonds == 2
    assert chain.basis_dimension == 4**4
    assert (
        chain.exact_mi
        <= chain.lemma1_value
        <= chain.prop1_value
        <= chain.prop2_value
        <= chain.step3_value
        <= chain.theorem_value
    )
    assert chain.pb_exact_lhs <= chain.pb_exact_rhs
    assert chain.g <= chain.lemma_s3_rhs
    assert chain.pinsker_slack >= 0.0
    assert chain.translation_spread < 1e-10
    assert all(slack >= -1e-8 for slack in chain.slacks.values())


def test_chain_without_hopping_is_trivial():
    chain = verify_chain(ChainParameters(d=1, L=4, L_A=2, n_max=2, beta=1.0, J=0.0, U=1.0, mu=1.0))

    assert chain.exact_mi == pytest.approx(0.0, abs=1e-10)
    assert chain.lemma1_value == pytest.approx(0.0, abs=1e-10)
    assert chain.prop1_value == 0.0
    assert chain.theorem_value == 0.0
    assert chain.report.flagged() == ["zero_mode"]


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_chain_flags_only_the_zero_mode_across_temperatures(beta):
    chain = verify_chain(ChainParameters(d=1, L=4, L_A=2, n_max=2, beta=beta, J=1.0, U=1.0, mu=1.0))

    assert chain.report.flagged() == ["zero_mode"]


def test_square_lattice_chain_with_a_global_cap():
    params = ChainParameters(d=2, L=3, L_A=1, n_max=2, beta=1.0, J=1.0, U=1.0, mu=1.0, n_cap=6)
    chain = verify_chain(params)

    assert chain.boundary_weight == 6
    assert chain.report.flagged() == ["zero_mode"]
    assert chain.report.links["lemma1_prop1"].state is LinkState.PASS
    assert chain.report.links["pinsker"].state is LinkState.PASS


@pytest.mark.parametrize("L", [4, 5])
@pytest.mark.parametrize("beta", [0.25, 4.0])
def test_chain_scales_with_max_one_beta_at_the_sweep_edges(L, beta):
    chain = verify_chain(ChainParameters(d=1, L=L, L_A=L // 2, n_max=3, beta=beta, J=1.0, U=1.0, mu=1.0))

    assert chain.exact_mi <= chain.lemma1_value <= chain.prop1_value <= chain.theorem_value
    assert chain.theorem_value == pytest.approx(main_constant(1.0, 1.0, 1.0, 1) * max(1.0, beta))
    assert chain.exact_mi / max(1.0, beta) <= main_constant(1.0, 1.0, 1.0, 1)
    assert chain.report.links["mi_lemma1"].state is LinkState.PASS
    assert chain.report.links["pinsker"].state is LinkState.PASS


@pytest.mark.parametrize("L", [4, 5])
def test_riemann_bound_on_g_fails_at_low_temperature(L):
    # beta gamma = 12: the zero mode b/L outgrows 2(1 + eps1) f + eps2.
    cold = verify_chain(ChainParameters(d=1, L=L, L_A=L // 2, n_max=2, beta=4.0, J=1.0, U=1.0, mu=1.0))
    hot = verify_chain(ChainParameters(d=1, L=L, L_A=L // 2, n_max=2, beta=0.25, J=1.0, U=1.0, mu=1.0))

    assert cold.gamma == pytest.approx(3.0)
    assert cold.report.flagged() == ["lemma_s3", "zero_mode"]
    assert cold.g - cold.lemma_s3_rhs > 2e-8
    assert hot.report.flagged() == ["zero_mode"]
    assert hot.g <= hot.lemma_s3_rhs
