"""Validation of the inequality chain links for one evaluated parameter point."""
from __future__ import annotations

from typing import Callable, Dict, Tuple

from . import models

CHAIN_TOLERANCE = 1e-8
PINSKER_TOLERANCE = 1e-9
TRANSLATION_TOLERANCE = 1e-10

LINK_KEYS = (
    "mi_lemma1",
    "lemma1_prop1",
    "prop1_prop2",
    "prop2_step3",
    "step3_theorem",
    "prop2_theorem",
    "pb_exact",
    "lemma_s3",
    "zero_mode",
    "pinsker",
    "translation",
)

# (smaller, larger, description); the link holds when larger - smaller >= -tol.
LinkRule = Tuple[Callable[[models.BoundChain], float], Callable[[models.BoundChain], float], str]


class ChainValidator:
    """Turns every link of a BoundChain into a PASS / FLAG / UNKNOWN status.

    Links that hold exactly on any truncated space are FLAG on violation. Links that rely on an
    infinite-dimensional argument or on hypotheses the point does not satisfy drop to UNKNOWN.
    """

    def __init__(self, tolerance: float = CHAIN_TOLERANCE) -> None:
        self.tolerance = tolerance
        self._rules: Dict[str, LinkRule] = {
            "mi_lemma1": (lambda c: c.exact_mi, lambda c: c.lemma1_value, "I(A:B) <= boundary energy bound"),
            "lemma1_prop1": (lambda c: c.lemma1_value, lambda c: c.prop1_value, "boundary energy <= (8/L) beta J <N>"),
            "prop1_prop2": (lambda c: c.prop1_value, lambda c: c.prop2_value, "ED particle number <= free-reference bound"),
            "prop2_step3": (lambda c: c.prop2_value, lambda c: c.step3_value, "free-reference bound <= Planck relaxation"),
            "step3_theorem": (lambda c: c.step3_value, lambda c: c.theorem_value, "Planck relaxation <= c max{1,beta} L^{d-1}"),
            "prop2_theorem": (lambda c: c.prop2_value, lambda c: c.theorem_value, "free-reference bound <= c max{1,beta} L^{d-1}"),
            "pb_exact": (lambda c: c.pb_exact_lhs, lambda c: c.pb_exact_rhs, "Peierls-Bogoliubov swap to H_0 + gamma N"),
            "lemma_s3": (lambda c: c.g, lambda c: c.lemma_s3_rhs, "g <= 2^d (1 + eps1) f + eps2"),
            "zero_mode": (lambda c: c.zero_mode_bound, lambda c: c.epsilon2, "eps2 >= zero-mode sum"),
        }

    def validate(self, chain: models.BoundChain) -> models.ChainReport:
        report = models.ChainReport.empty()
        for key, (smaller, larger, description) in self._rules.items():
            slack = larger(chain) - smaller(chain)
            report.register(key, self._evaluate_link(key, slack, description, chain))
        report.register("pinsker", self._threshold(chain.pinsker_slack, PINSKER_TOLERANCE, "I(A:B) >= ||rho_AB - rho_A rho_B||_1^2 / 2"))
        report.register(
            "translation",
            self._threshold(TRANSLATION_TOLERANCE - chain.translation_spread, 0.0, "<n_x> equal on every site"),
        )
        return report

    def _threshold(self, slack: float, tolerance: float, description: str) -> models.LinkStatus:
        if slack >= -tolerance:
            return models.LinkStatus(models.LinkState.PASS, slack, "")
        return models.LinkStatus(models.LinkState.FLAG, slack, f"{description} violated by {-slack:.3e}")

    def _evaluate_link(
        self,
        key: str,
        slack: float,
        description: str,
        chain: models.BoundChain,
    ) -> models.LinkStatus:
        if slack >= -self.tolerance:
            return models.LinkStatus(models.LinkState.PASS, slack, "")
        message = f"{description} violated by {-slack:.3e}"
        reason = self._unsupported_reason(key, chain)
        if reason:
            return models.LinkStatus(models.LinkState.UNKNOWN, slack, f"{message} ({reason})")
        return models.LinkStatus(models.LinkState.FLAG, slack, message)

    def _unsupported_reason(self, key: str, chain: models.BoundChain) -> str:
        params = chain.params
        if key == "mi_lemma1" and params.n_cap is not None:
            return "rho_A (x) rho_B leaves the capped space"
        if key in ("step3_theorem", "prop2_theorem"):
            if params.beta < 1.0:
                return "beta < 1"
            if params.gamma is not None:
                return "gamma overridden"
        return ""


__all__ = ["CHAIN_TOLERANCE", "ChainValidator", "LINK_KEYS", "PINSKER_TOLERANCE", "TRANSLATION_TOLERANCE"]
