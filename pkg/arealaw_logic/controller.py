"""Orchestrates chain verification over experiment grids, cutoff scans and check suites."""
from __future__ import annotations

import logging
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, models
from .bounds import exact_observables, verify_chain
from .checks import CheckSuiteFactory
from .fock import DimensionGuardError
from .gibbs import NumericalError
from .persistence import InMemoryReportStore, ReportStore
from .settings import ConfigError

logger = logging.getLogger(__name__)

Verifier = Callable[[models.ChainParameters], models.BoundChain]
Observables = Callable[[models.ChainParameters], Tuple[float, float]]

RELATIVE_FLOOR = 1e-8


def classify_error(exc: BaseException) -> models.ErrorKind:
    if isinstance(exc, DimensionGuardError):
        return models.ErrorKind.GUARD
    if isinstance(exc, (ConfigError, ValueError)):
        return models.ErrorKind.CONFIG
    return models.ErrorKind.NUMERICAL


def verify_point(
    params: models.ChainParameters,
    *,
    config_hash: str = "",
    seed: int = 0,
    verifier: Optional[Verifier] = None,
) -> models.ReportRecord:
    """One grid point; failures end up on ``record.errors`` instead of propagating."""
    verifier = verifier or verify_chain
    record = models.ReportRecord(params=params, version=__version__, config_hash=config_hash, seed=seed)
    start = time.perf_counter()
    try:
        chain = verifier(params)
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        record.errors.append(models.RecordError(models.ErrorKind.NUMERICAL, f"{type(exc).__name__}: {exc}"))
        logger.error("point %s failed: %s", params.key(), exc)
    except (DimensionGuardError, NumericalError, ValueError) as exc:
        record.errors.append(models.RecordError(classify_error(exc), str(exc)))
        logger.error("point %s failed: %s", params.key(), exc)
    else:
        record.chain = chain
        for key in chain.report.flagged():
            record.warnings.append(f"{key}: {chain.report.links[key].message}")
    record.wall_time = time.perf_counter() - start
    logger.info("point %s done in %.2fs", params.key(), record.wall_time)
    return record


def _relative_change(new: float, old: float) -> float:
    return abs(new - old) / max(abs(new), abs(old), RELATIVE_FLOOR)


def annotate_convergence(records: Sequence[models.ReportRecord], tolerance: float) -> None:
    """Set convergence_status from successive n_max values of the same (L, beta)."""
    groups: Dict[Tuple[int, float], List[models.ReportRecord]] = defaultdict(list)
    for record in records:
        groups[(record.params.L, record.params.beta)].append(record)
    for members in groups.values():
        ordered = sorted(members, key=lambda record: record.params.n_max)
        if len(ordered) < 2:
            continue
        last, previous = ordered[-1], ordered[-2]
        if last.chain is None or previous.chain is None:
            status = "not converged"
        else:
            mi = _relative_change(last.chain.exact_mi, previous.chain.exact_mi)
            number = _relative_change(last.chain.n_expectation, previous.chain.n_expectation)
            status = "converged" if max(mi, number) < tolerance else "not converged"
        for record in ordered:
            record.convergence_status = status


def run_experiment(
    config: models.ExperimentConfig,
    *,
    jobs: int = 1,
    verifier: Optional[Verifier] = None,
    store: Optional[ReportStore] = None,
) -> List[models.ReportRecord]:
    """Verify every (L, n_max, beta) grid point; records come back in grid order.

    Points the store already holds as completed under the same config hash are not recomputed.
    """
    store = store if store is not None else InMemoryReportStore()
    points = config.grid()
    config_hash = config.config_hash()
    pending = [point for point in points if store.completed(point.key(), config_hash) is None]
    task = partial(verify_point, config_hash=config_hash, seed=config.seed, verifier=verifier)
    logger.info("running %d of %d grid points with %d worker(s)", len(pending), len(points), jobs)
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            fresh = list(pool.map(task, pending))
    else:
        fresh = [task(point) for point in pending]
    for record in fresh:
        store.save(record)
    records = [store.load(point.key()) for point in points]
    annotate_convergence(records, config.converge_tol)
    return records


def converge(
    config: models.ExperimentConfig,
    *,
    observables: Optional[Observables] = None,
) -> List[models.ConvergenceTable]:
    """Exact I(A:B) and <N> against n_max for every (L, beta), stopping at a guard breach."""
    observables = observables or exact_observables
    cutoffs = sorted(set(config.n_max))
    if len(cutoffs) < 2:
        raise ConfigError(f"convergence needs at least two n_max values, got {cutoffs}")

    tables: List[models.ConvergenceTable] = []
    for L in config.L:
        for beta in config.beta:
            table = models.ConvergenceTable(L=L, beta=beta, tolerance=config.converge_tol)
            for n_max in cutoffs:
                try:
                    mi, number = observables(config.point(L, n_max, beta))
                except DimensionGuardError as exc:
                    table.note = f"stopped at n_max={n_max}: {exc}"
                    logger.warning("convergence scan L=%d beta=%g %s", L, beta, table.note)
                    break
                row = models.ConvergenceRow(n_max=n_max, exact_mi=mi, n_expectation=number)
                if table.rows:
                    previous = table.rows[-1]
                    row.mi_difference = _relative_change(mi, previous.exact_mi)
                    row.n_difference = _relative_change(number, previous.n_expectation)
                table.rows.append(row)
            last = table.rows[-1] if table.rows else None
            table.converged = bool(
                not table.note
                and last is not None
                and last.mi_difference is not None
                and max(last.mi_difference, last.n_difference) < table.tolerance
            )
            logger.info("convergence L=%d beta=%g: %s", L, beta, table.status)
            tables.append(table)
    return tables


def run_checks(
    seed: int,
    names: Optional[Iterable[str]] = None,
    *,
    factory: Optional[CheckSuiteFactory] = None,
) -> List[models.CheckResult]:
    factory = factory or CheckSuiteFactory.build_default()
    registered = factory.names()
    selected = list(names) if names else registered
    results: List[models.CheckResult] = []
    for name in selected:
        suite = factory.create(name)
        # Streams depend on the suite, not on which suites were selected.
        rng = np.random.default_rng([seed, registered.index(name)])
        result = suite.run(rng)
        logger.info("check %s: %d cases, worst slack %.3e", name, result.cases, result.worst_slack)
        results.append(result)
    return results


def exit_code(records: Iterable[models.ReportRecord]) -> int:
    """0 when every record succeeded, otherwise the largest error-kind code."""
    codes = [error.kind.exit_code for record in records for error in record.errors]
    return max(codes, default=0)


__all__ = [
    "annotate_convergence",
    "classify_error",
    "converge",
    "exit_code",
    "run_checks",
    "run_experiment",
    "verify_point",
]
