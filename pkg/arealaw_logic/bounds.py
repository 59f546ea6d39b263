"""Evaluation of the inequality chain from mutual information to the area-law constant."""
from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special

from . import models
from .fock import (
    SiteOperatorKind,
    SparseOperator,
    assemble_bose_hubbard,
    assemble_decomposition,
    assemble_free,
    build_basis,
    interaction_operator,
    number_operator,
    site_operator,
)
from .gibbs import (
    DensityMatrix,
    block_expectation,
    decoupling_distance,
    entropy,
    expectation,
    gibbs_state,
    product_blocks,
    reduced_states,
)
from .lattice import bipartition, build_lattice
from .quasifree import lemma_s3_rhs, one_particle_dm, planck_estimate, square_moment, wick_onsite_pair, zero_mode_bound
from .validators import ChainValidator

logger = logging.getLogger(__name__)


def lemma1_bound(
    H_boundary: SparseOperator,
    rho_AB: DensityMatrix,
    rho_A: DensityMatrix,
    rho_B: DensityMatrix,
    beta: float,
) -> float:
    """beta tr(H_boundary (rho_A (x) rho_B - rho_AB))."""
    blocks, _ = product_blocks(rho_A, rho_B, rho_AB.basis)
    return beta * (block_expectation(H_boundary, blocks) - expectation(H_boundary, rho_AB))


def prop1_bound(beta: float, J: float, L: int, N_expectation: float) -> float:
    """(8/L) beta J tr(N rho_AB)."""
    return 8.0 / L * beta * J * N_expectation


def _c0(U: float, mu: float, gamma: float) -> float:
    return 0.25 * U / (gamma + mu)


def _onsite_offset(c0: float) -> float:
    return c0 / 4.0 * (1.0 + 1.0 / c0) ** 2


def prop2_bound(opdm: models.OneParticleDM, U: float, mu: float) -> models.Prop2Bound:
    """Interaction-removal bound on <N> with free-reference expectations from Wick's rule.

    ``exact_free`` keeps -(mu + gamma - 2dJ)<N>_free, ``relaxed`` drops it.
    """
    lattice, gamma, J = opdm.lattice, opdm.gamma, opdm.J
    if U <= 0:
        raise ValueError(f"on-site repulsion U must be > 0, got {U}")
    if gamma <= 2 * lattice.d * J - mu:
        raise ValueError(f"gamma={gamma} must exceed 2dJ - mu = {2 * lattice.d * J - mu}")
    volume = lattice.n_sites
    c0 = _c0(U, mu, gamma)
    n_free = volume * opdm.g
    w_free = 0.5 * U * volume * wick_onsite_pair(opdm)
    shift = mu + gamma - 2 * lattice.d * J
    offset = _onsite_offset(c0) * volume
    exact_free = 2.0 * (c0 / (0.5 * U) * (w_free - shift * n_free) + offset)
    relaxed = 2.0 * (c0 / (0.5 * U) * w_free + offset)
    return models.Prop2Bound(c0=c0, n_free=n_free, w_free=w_free, shift=shift, exact_free=exact_free, relaxed=relaxed)


def step3_bound(estimate: models.PlanckEstimate, lattice: models.LatticeSpec, U: float, mu: float) -> float:
    """2L^d ( C_0/(U/2) (2^{2d+2}(1+eps1)^2 f^2 + 4 eps2^2) + C_0/4 (1 + 1/C_0)^2 ), as displayed."""
    d = lattice.d
    c0 = _c0(U, mu, estimate.gamma)
    pair_bound = 2.0 ** (2 * d + 2) * (1.0 + estimate.epsilon1) ** 2 * estimate.f_value**2 + 4.0 * estimate.epsilon2**2
    return 2.0 * lattice.n_sites * (c0 / (0.5 * U) * pair_bound + _onsite_offset(c0))


def onsite_number_slack(n: int, C: float) -> float:
    """C n(n-1) + C/4 (1 + 1/C)^2 - n, nonnegative for every integer n."""
    return C * n * (n - 1) + _onsite_offset(C) - n


def main_constant(J: float, U: float, mu: float, d: int) -> float:
    if J < 0:
        raise ValueError(f"hopping J must be >= 0, got {J}")
    if U <= 0 or mu <= 0:
        raise ValueError(f"U and mu must be > 0, got U={U}, mu={mu}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got d={d}")
    shifted = 2 * d * J + 1 + mu
    wick_term = (16.0 + 4.0 * 6.0 ** (2 * (d - 1)) / math.expm1(1.0) ** 2) / (2.0 * shifted)
    return 16.0 * J * (wick_term + U / (16.0 * shifted) + shifted / U + 0.5)


def theorem_bound(beta: float, L: int, d: int, J: float, U: float, mu: float) -> float:
    """c(J, U, mu) max{1, beta} L^{d-1}."""
    if beta <= 0:
        raise ValueError(f"inverse temperature must be > 0, got {beta}")
    return main_constant(J, U, mu, d) * max(1.0, beta) * L ** (d - 1)


def _check_grading(matrix: np.ndarray, grading: np.ndarray, name: str, tol: float = 1e-12) -> None:
    crossing = grading[:, None] != grading[None, :]
    if np.any(np.abs(matrix[crossing]) > tol):
        raise ValueError(f"{name} does not commute with the number grading")


def _thermal_average(generator: np.ndarray, observable: np.ndarray) -> Tuple[float, float]:
    values, vectors = linalg.eigh(generator)
    weights = special.softmax(values)
    diagonal = np.einsum("ij,ij->j", vectors.conj(), observable @ vectors).real
    return float(weights @ diagonal), float(special.logsumexp(values))


def peierls_bogoliubov_check(
    K: np.ndarray,
    P: np.ndarray,
    grading: Optional[Sequence[int]] = None,
) -> models.PeierlsBogoliubovResult:
    """tr(P e^K)/tr(e^K) against log(tr e^{K+P} / tr e^K) and tr(P e^{K+P})/tr(e^{K+P})."""
    K, P = np.asarray(K), np.asarray(P)
    if grading is not None:
        labels = np.asarray(grading)
        _check_grading(K, labels, "K")
        _check_grading(P, labels, "P")
    lhs, log_z = _thermal_average(K, P)
    shifted, log_z_shifted = _thermal_average(K + P, P)
    return models.PeierlsBogoliubovResult(lhs=lhs, rhs_log=log_z_shifted - log_z, rhs_shifted=shifted)


def _interacting_state(params: models.ChainParameters):
    lattice = build_lattice(params.d, params.L)
    cut = bipartition(lattice, params.L_A)
    basis = build_basis(lattice, params.n_max, params.n_cap, dimension_guard=params.dimension_guard)
    H = assemble_bose_hubbard(basis, params.J, params.U, params.mu)
    return lattice, cut, basis, H, gibbs_state(H, params.beta)


def exact_observables(params: models.ChainParameters) -> Tuple[float, float]:
    """Exact I(A:B) and <N> only, for cutoff scans."""
    _, cut, basis, _, rho = _interacting_state(params)
    rho_A, rho_B = reduced_states(rho, cut)
    mi = entropy(rho_A) + entropy(rho_B) - entropy(rho)
    return mi, expectation(number_operator(basis), rho)


def verify_chain(
    params: models.ChainParameters,
    *,
    validator: Optional[ChainValidator] = None,
) -> models.BoundChain:
    """Evaluate every link from exact I(A:B) to c(J,U,mu) max{1,beta} L^{d-1} for one point."""
    validator = validator or ChainValidator()
    beta, J, U, mu, d, L = params.beta, params.J, params.U, params.mu, params.d, params.L
    gamma = params.resolved_gamma
    logger.info("verifying chain at %s (gamma=%g)", params.key(), gamma)

    lattice, cut, basis, H, rho = _interacting_state(params)
    chain = models.BoundChain(params=params, gamma=gamma, basis_dimension=basis.dimension)
    chain.boundary_bonds = len(cut.boundary_bonds)
    chain.boundary_weight = cut.boundary_weight

    rho_A, rho_B = reduced_states(rho, cut)
    chain.entropy_ab, chain.entropy_a, chain.entropy_b = entropy(rho), entropy(rho_A), entropy(rho_B)
    chain.exact_mi = chain.entropy_a + chain.entropy_b - chain.entropy_ab

    H_boundary = assemble_decomposition(basis, cut, J, U, mu).H_boundary
    chain.lemma1_value = lemma1_bound(H_boundary, rho, rho_A, rho_B, beta)

    N = number_operator(basis)
    chain.n_expectation = expectation(N, rho)
    occupations = [expectation(site_operator(basis, x, SiteOperatorKind.NUMBER), rho) for x in basis.sites]
    chain.translation_spread = float(max(occupations) - min(occupations))
    chain.prop1_value = prop1_bound(beta, J, L, chain.n_expectation)

    prefactor = 8.0 / L * beta * J
    opdm = one_particle_dm(lattice, beta, gamma, J)
    chain.g = opdm.g
    step2 = prop2_bound(opdm, U, mu)
    chain.c0 = step2.c0
    chain.n_bound_free = step2.exact_free
    chain.prop2_value = prefactor * step2.exact_free
    chain.prop2_relaxed_value = prefactor * step2.relaxed

    estimate = planck_estimate(lattice, beta, gamma, J, params.quad_tol)
    chain.f_value, chain.f_error = estimate.f_value, estimate.error_estimate
    chain.epsilon1, chain.epsilon2 = estimate.epsilon1, estimate.epsilon2
    chain.lemma_s3_rhs = lemma_s3_rhs(opdm, estimate)
    chain.zero_mode_bound = zero_mode_bound(L, d, beta, gamma)
    chain.n_bound_step3 = step3_bound(estimate, lattice, U, mu)
    chain.step3_value = prefactor * chain.n_bound_step3

    chain.main_constant = main_constant(J, U, mu, d)
    chain.theorem_value = theorem_bound(beta, L, d, J, U, mu)

    rho_free = gibbs_state(assemble_free(basis, J, gamma), beta)
    W = interaction_operator(basis, U)
    literal = W - N * (mu + gamma - 2 * d * J)
    consistent = W - N * (mu + gamma + 2 * d * J)
    chain.pb_literal_lhs, chain.pb_literal_rhs = expectation(literal, rho), expectation(literal, rho_free)
    chain.pb_exact_lhs, chain.pb_exact_rhs = expectation(consistent, rho), expectation(consistent, rho_free)

    n_x = site_operator(basis, basis.sites[0], SiteOperatorKind.NUMBER)
    chain.square_moment_ed = expectation(n_x @ n_x, rho_free)
    chain.wick_pair_ed = chain.square_moment_ed - expectation(n_x, rho_free)
    chain.wick_pair_quasifree = wick_onsite_pair(opdm)
    chain.square_moment_quasifree = square_moment(opdm)

    chain.trace_distance = decoupling_distance(rho, rho_A, rho_B)
    chain.pinsker_slack = chain.exact_mi - 0.5 * chain.trace_distance**2

    chain.report = validator.validate(chain)
    for key in chain.report.flagged():
        logger.warning("chain link %s flagged at %s: %s", key, params.key(), chain.report.links[key].message)
    return chain


__all__ = [
    "exact_observables",
    "lemma1_bound",
    "main_constant",
    "onsite_number_slack",
    "peierls_bogoliubov_check",
    "prop1_bound",
    "prop2_bound",
    "step3_bound",
    "theorem_bound",
    "verify_chain",
]
