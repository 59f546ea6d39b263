"""Quasi-free reference states: one-particle density matrix, Wick pairs and the Planck integral."""
from __future__ import annotations

import logging
import math
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import linalg

from . import models
from .gibbs import NumericalError
from .lattice import build_lattice, chain_spectrum, laplacian_matrix

logger = logging.getLogger(__name__)

GAUSS_ORDER = 16
MAX_QUADRATURE_POINTS = 1 << 22


class QuadratureError(NumericalError):
    """Raised when the Planck integral cannot reach the requested tolerance."""


def bose_occupation(energy: np.ndarray) -> np.ndarray:
    """(e^{x} - 1)^{-1} for x > 0."""
    return 1.0 / np.expm1(energy)


def _check_reference(beta: float, gamma: float, J: float) -> None:
    if beta <= 0:
        raise ValueError(f"inverse temperature must be > 0, got {beta}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0 for a normalisable reference state, got {gamma}")
    if J < 0:
        raise ValueError(f"hopping J must be >= 0, got {J}")


def _spectral_diagonal(lattice: models.LatticeSpec, site: models.Site, beta: float, gamma: float, J: float) -> float:
    table = chain_spectrum(lattice.L)
    energies = np.zeros(1)
    weights = np.ones(1)
    for coordinate in site:
        amplitudes = table.eigenvectors[coordinate - 1, :] ** 2
        energies = np.add.outer(energies, table.eigenvalues).ravel()
        weights = np.multiply.outer(weights, amplitudes).ravel()
    return float(np.sum(weights * bose_occupation(beta * (J * energies + gamma))))


def one_particle_dm(lattice: models.LatticeSpec, beta: float, gamma: float, J: float) -> models.OneParticleDM:
    """<a_x^dagger a_x> in the Gibbs state of H_0 + gamma N, from the chain eigenpairs at x = (1, ..., 1)."""
    _check_reference(beta, gamma, J)
    origin = (1,) * lattice.d
    g = _spectral_diagonal(lattice, origin, beta, gamma, J)
    return models.OneParticleDM(lattice=lattice, beta=beta, gamma=gamma, J=J, g=g)


def diagonal_at(opdm: models.OneParticleDM, site: models.Site) -> float:
    return _spectral_diagonal(opdm.lattice, tuple(site), opdm.beta, opdm.gamma, opdm.J)


def one_particle_matrix(lattice: models.LatticeSpec, beta: float, gamma: float, J: float) -> np.ndarray:
    """(e^{beta(-J Laplacian + gamma)} - 1)^{-1} as a dense matrix function."""
    _check_reference(beta, gamma, J)
    values, vectors = linalg.eigh(laplacian_matrix(lattice))
    occupations = bose_occupation(beta * (J * values + gamma))
    return (vectors * occupations) @ vectors.T


def wick_onsite_pair(opdm: models.OneParticleDM) -> float:
    """<a^dagger a^dagger a a> = 2 g^2 in a quasi-free state."""
    return 2.0 * opdm.g**2


def square_moment(opdm: models.OneParticleDM) -> float:
    """<(a^dagger a)^2> = <a^dagger a^dagger a a> + <a^dagger a>."""
    return wick_onsite_pair(opdm) + opdm.g


def _panel_rule(panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = legendre.leggauss(order)
    width = 0.5 / panels
    starts = np.arange(panels) * width
    points = (starts[:, None] + 0.5 * width * (nodes[None, :] + 1.0)).ravel()
    scaled = np.tile(0.5 * width * weights, panels)
    return points, scaled


def _tensor_rule(d: int, beta: float, gamma: float, J: float, panels: int, order: int) -> float:
    points, weights = _panel_rule(panels, order)
    axis = 4.0 * J * beta * np.sin(np.pi * points) ** 2
    exponent = np.full(1, beta * gamma)
    mass = np.ones(1)
    for _ in range(d):
        exponent = np.add.outer(exponent, axis).ravel()
        mass = np.multiply.outer(mass, weights).ravel()
    return float(np.sum(mass * bose_occupation(exponent)))


def planck_integral(
    d: int,
    beta: float,
    gamma: float,
    J: float,
    tol: float = 1e-10,
    *,
    order: int = GAUSS_ORDER,
    max_points: int = MAX_QUADRATURE_POINTS,
) -> models.PlanckEstimate:
    """f(gamma, beta, J) over [0, 1/2]^d by tensorised composite Gauss-Legendre.

    Panels double until two successive rules agree to ``tol``; the finer value is returned with
    the difference as its error estimate.
    """
    _check_reference(beta, gamma, J)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got d={d}")
    if tol <= 0:
        raise ValueError(f"tolerance must be > 0, got {tol}")

    panels = 1
    error = math.inf
    coarse = _tensor_rule(d, beta, gamma, J, panels, order)
    while True:
        panels *= 2
        points = (panels * order) ** d
        if points > max_points:
            raise QuadratureError(
                f"Planck integral did not reach tol={tol:g} within {max_points} points (last error {error:.3e})"
            )
        fine = _tensor_rule(d, beta, gamma, J, panels, order)
        error = abs(fine - coarse)
        logger.debug("planck d=%d panels=%d value=%.15g error=%.3e", d, panels, fine, error)
        if error <= tol:
            return models.PlanckEstimate(
                d=d, beta=beta, gamma=gamma, J=J, f_value=fine, error_estimate=error, points=points
            )
        coarse = fine


def error_terms(L: int, d: int, beta: float, gamma: float) -> Tuple[float, float]:
    """epsilon_1 = (L+1)^d / L^d - 1 and epsilon_2 = b / L^d * (2(2L+1))^{d-1} / (2L-1), b = (e^{beta gamma}-1)^{-1}."""
    if L < 2:
        raise ValueError(f"side length must be >= 2, got L={L}")
    if gamma <= 0 or beta <= 0:
        raise ValueError("beta and gamma must be > 0")
    epsilon1 = (L + 1) ** d / L**d - 1.0
    occupation = 1.0 / math.expm1(beta * gamma)
    epsilon2 = occupation / L**d * (2 * (2 * L + 1)) ** (d - 1) / (2 * L - 1)
    return epsilon1, epsilon2


def zero_mode_bound(L: int, d: int, beta: float, gamma: float) -> float:
    """b / L^d * sum_{k=0}^{d-1} (4l)^k with l = ceil(L/2): the zero-mode terms with every summand at its maximum."""
    ell = math.ceil(L / 2)
    occupation = 1.0 / math.expm1(beta * gamma)
    return occupation / L**d * sum((4 * ell) ** k for k in range(d))


def zero_mode_closed_form(L: int, d: int, beta: float, gamma: float) -> float:
    """The displayed closed form b / L^d * ((4l)^{d-1} - 1) / (4l - 1)."""
    ell = math.ceil(L / 2)
    occupation = 1.0 / math.expm1(beta * gamma)
    return occupation / L**d * ((4 * ell) ** (d - 1) - 1) / (4 * ell - 1)


def riemann_split(L: int, beta: float, gamma: float, J: float) -> Tuple[float, float, float]:
    """For d = 1: (zero-mode term b/L, Riemann part 2/L sum_i h(lambda_2i), exact g)."""
    _check_reference(beta, gamma, J)
    ell = math.ceil(L / 2)
    table = chain_spectrum(L)
    zero_mode = 1.0 / (L * math.expm1(beta * gamma))
    even_values = np.array([table.eigenvalues[2 * i - 1] for i in range(1, ell + 1) if 2 * i <= L])
    riemann = 2.0 / L * float(np.sum(bose_occupation(beta * (J * even_values + gamma))))
    exact = one_particle_dm(build_lattice(1, L), beta, gamma, J).g
    return zero_mode, riemann, exact


def with_error_terms(estimate: models.PlanckEstimate, L: int) -> models.PlanckEstimate:
    epsilon1, epsilon2 = error_terms(L, estimate.d, estimate.beta, estimate.gamma)
    return models.PlanckEstimate(
        d=estimate.d,
        beta=estimate.beta,
        gamma=estimate.gamma,
        J=estimate.J,
        f_value=estimate.f_value,
        error_estimate=estimate.error_estimate,
        epsilon1=epsilon1,
        epsilon2=epsilon2,
        points=estimate.points,
    )


def planck_estimate(
    lattice: models.LatticeSpec,
    beta: float,
    gamma: float,
    J: float,
    tol: float = 1e-10,
) -> models.PlanckEstimate:
    return with_error_terms(planck_integral(lattice.d, beta, gamma, J, tol), lattice.L)


def lemma_s3_rhs(opdm: models.OneParticleDM, estimate: models.PlanckEstimate) -> float:
    """2^d (1 + epsilon_1) f + epsilon_2, the upper bound on g."""
    consistent = (
        estimate.d == opdm.lattice.d
        and math.isclose(estimate.beta, opdm.beta)
        and math.isclose(estimate.gamma, opdm.gamma)
        and math.isclose(estimate.J, opdm.J)
    )
    if not consistent:
        raise ValueError("Planck estimate and one-particle density matrix use different parameters")
    return estimate.lemma_s3_rhs


def lemma_s4_rhs(d: int, alpha: float, beta: float, gamma: float) -> float:
    """2^{-d} e^{-alpha beta gamma} / ((1 - alpha) beta gamma)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if beta * gamma <= 0:
        raise ValueError("beta * gamma must be > 0")
    return 2.0**-d * math.exp(-alpha * beta * gamma) / ((1.0 - alpha) * beta * gamma)


def lemma_s4_limit(d: int, beta: float, gamma: float) -> float:
    """The alpha -> 0 value 2^{-d} / (beta gamma)."""
    if beta * gamma <= 0:
        raise ValueError("beta * gamma must be > 0")
    return 2.0**-d / (beta * gamma)


def midpoint_planck(d: int, beta: float, gamma: float, J: float, points_per_axis: int) -> float:
    """Brute-force midpoint rule, used as an independent oracle."""
    width = 0.5 / points_per_axis
    axis = 4.0 * J * beta * np.sin(np.pi * (np.arange(points_per_axis) + 0.5) * width) ** 2
    exponent: Optional[np.ndarray] = None
    for _ in range(d):
        exponent = axis if exponent is None else np.add.outer(exponent, axis)
    return float(np.sum(bose_occupation(exponent + beta * gamma)) * width**d)


__all__ = [
    "QuadratureError",
    "bose_occupation",
    "diagonal_at",
    "error_terms",
    "lemma_s3_rhs",
    "lemma_s4_limit",
    "lemma_s4_rhs",
    "midpoint_planck",
    "one_particle_dm",
    "one_particle_matrix",
    "planck_estimate",
    "planck_integral",
    "riemann_split",
    "square_moment",
    "wick_onsite_pair",
    "with_error_terms",
    "zero_mode_bound",
    "zero_mode_closed_form",
]
