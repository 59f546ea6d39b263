import numpy as np
import pytest

from arealaw_logic import models
from arealaw_logic.checks import CheckSuite, CheckSuiteFactory
from arealaw_logic.controller import (
    annotate_convergence,
    classify_error,
    converge,
    exit_code,
    run_checks,
    run_experiment,
    verify_point,
)
from arealaw_logic.fock import DimensionGuardError
from arealaw_logic.gibbs import NumericalError
from arealaw_logic.persistence import InMemoryReportStore
from arealaw_logic.reporting import flatten_record
from arealaw_logic.settings import ConfigError
from arealaw_logic.validators import ChainValidator

PARAMS = models.ChainParameters(d=1, L=4, L_A=2, n_max=2, beta=1.0, J=1.0, U=1.0, mu=1.0)


def stub_chain(params, theorem=4.0):
    chain = models.BoundChain(
        params=params,
        exact_mi=0.1 + 1e-3 / params.n_max**4,
        lemma1_value=0.2,
        prop1_value=1.0,
        prop2_value=2.0,
        step3_value=3.0,
        theorem_value=theorem,
        pb_exact_rhs=1.0,
        g=0.1,
        lemma_s3_rhs=0.2,
        n_expectation=2.0,
    )
    chain.report = ChainValidator().validate(chain)
    return chain


def failing_verifier(exc):
    def verifier(params):
        raise exc

    return verifier


@pytest.mark.parametrize(
    "exc,kind",
    [
        (DimensionGuardError("largest sector too big"), models.ErrorKind.GUARD),
        (ValueError("U must be > 0"), models.ErrorKind.CONFIG),
        (NumericalError("eigh failed"), models.ErrorKind.NUMERICAL),
        (np.linalg.LinAlgError("singular"), models.ErrorKind.NUMERICAL),
        (ZeroDivisionError("division by zero"), models.ErrorKind.NUMERICAL),
    ],
)
def test_verify_point_records_failures(exc, kind):
    record = verify_point(PARAMS, config_hash="h", seed=1, verifier=failing_verifier(exc))

    assert record.chain is None
    assert record.errors[0].kind is kind
    assert str(exc) in record.errors[0].message
    assert record.config_hash == "h"
    assert record.wall_time >= 0.0


def test_classify_error():
    assert classify_error(DimensionGuardError("x")) is models.ErrorKind.GUARD
    assert classify_error(ConfigError("x")) is models.ErrorKind.CONFIG
    assert classify_error(RuntimeError("x")) is models.ErrorKind.NUMERICAL


def test_verify_point_turns_flags_into_warnings():
    record = verify_point(PARAMS, verifier=lambda params: stub_chain(params, theorem=2.5))

    assert record.ok
    assert record.version == "0.1.0"
    assert record.warnings and record.warnings[0].startswith("step3_theorem")


def test_run_experiment_keeps_grid_order_and_fills_the_store():
    config = models.ExperimentConfig(L=[4, 6], n_max=[2, 3], beta=[1.0], converge_tol=1e-2)
    store = InMemoryReportStore()
    records = run_experiment(config, verifier=stub_chain, store=store)

    assert [(r.params.L, r.params.n_max) for r in records] == [(4, 2), (4, 3), (6, 2), (6, 3)]
    assert store.keys() == [r.params.key() for r in records]
    assert all(r.config_hash == config.config_hash() for r in records)
    assert all(r.convergence_status == "converged" for r in records)


def test_run_experiment_reuses_completed_points_from_the_store():
    config = models.ExperimentConfig(L=[4, 6], n_max=[2], beta=[1.0])
    store = InMemoryReportStore()
    first = run_experiment(config, verifier=stub_chain, store=store)
    calls = []

    def counting(params):
        calls.append(params.key())
        return stub_chain(params)

    second = run_experiment(config, verifier=counting, store=store)

    assert calls == []
    assert [a is b for a, b in zip(first, second)] == [True, True]


def test_run_experiment_recomputes_failed_points_and_changed_configs():
    config = models.ExperimentConfig(L=[4, 6], n_max=[2], beta=[1.0])
    store = InMemoryReportStore()
    run_experiment(config, verifier=failing_verifier(ValueError("bad")), store=store)
    calls = []

    def counting(params):
        calls.append(params.L)
        return stub_chain(params)

    records = run_experiment(config, verifier=counting, store=store)
    assert calls == [4, 6]
    assert all(record.ok for record in records)

    changed = models.ExperimentConfig(L=[4, 6], n_max=[2], beta=[1.0], U=2.0)
    run_experiment(changed, verifier=counting, store=store)
    assert calls == [4, 6, 4, 6]


def test_annotate_convergence_marks_changing_groups():
    records = [
        models.ReportRecord(params=models.ChainParameters(1, 4, 2, n_max, 1.0, 1.0, 1.0, 1.0), chain=stub_chain(PARAMS))
        for n_max in (2, 3)
    ]
    records[1].chain.exact_mi = 0.2
    annotate_convergence(records, 1e-4)

    assert [r.convergence_status for r in records] == ["not converged", "not converged"]


def test_single_cutoff_stays_unchecked():
    records = run_experiment(models.ExperimentConfig(L=[4], n_max=[2]), verifier=stub_chain)

    assert records[0].convergence_status == "unchecked"


def test_converge_builds_differences():
    config = models.ExperimentConfig(L=[4], n_max=[3, 2, 4], beta=[1.0], converge_tol=1e-2)
    tables = converge(config, observables=lambda p: (0.5 + 10.0**-p.n_max, 2.0))
    table = tables[0]

    assert [row.n_max for row in table.rows] == [2, 3, 4]
    assert table.rows[0].mi_difference is None
    assert table.rows[2].mi_difference == pytest.approx(9e-4 / 0.501, rel=1e-6)
    assert table.converged
    assert table.selected_n_max == 4


def test_converge_stops_at_the_dimension_guard():
    def observables(params):
        if params.n_max > 2:
            raise DimensionGuardError("largest sector has 99 states")
        return 0.5, 2.0

    config = models.ExperimentConfig(L=[4], n_max=[1, 2, 3], beta=[1.0])
    table = converge(config, observables=observables)[0]

    assert [row.n_max for row in table.rows] == [1, 2]
    assert "stopped at n_max=3" in table.note
    assert not table.converged


def test_converge_needs_two_cutoffs():
    with pytest.raises(ConfigError, match="two n_max"):
        converge(models.ExperimentConfig(n_max=[2, 2]))


class DrawSuite(CheckSuite):
    tolerance = 0.0

    def __init__(self, name):
        self.name = name

    def run(self, rng):
        result = self._result()
        result.record(rng.random())
        return result


def test_run_checks_streams_do_not_depend_on_the_selection():
    factory = CheckSuiteFactory()
    factory.register("first", lambda: DrawSuite("first"))
    factory.register("second", lambda: DrawSuite("second"))

    everything = run_checks(11, factory=factory)
    only_second = run_checks(11, ["second"], factory=factory)

    assert [r.name for r in everything] == ["first", "second"]
    assert only_second[0].worst_slack == everything[1].worst_slack
    assert everything[0].worst_slack != everything[1].worst_slack
    assert all(r.passed for r in everything)


def test_run_checks_rejects_unknown_suite():
    with pytest.raises(KeyError):
        run_checks(1, ["nope"], factory=CheckSuiteFactory())


def test_exit_code_takes_the_most_severe_error():
    ok = models.ReportRecord(params=PARAMS)
    config_error = models.ReportRecord(params=PARAMS, errors=[models.RecordError(models.ErrorKind.CONFIG, "x")])
    guard_error = models.ReportRecord(params=PARAMS, errors=[models.RecordError(models.ErrorKind.GUARD, "y")])

    assert exit_code([ok]) == 0
    assert exit_code([ok, config_error]) == 1
    assert exit_code([config_error, guard_error]) == 3


def test_small_real_run():
    config = models.ExperimentConfig(L=[3], n_max=[1, 2], beta=[1.0])
    records = run_experiment(config)

    assert all(record.ok for record in records)
    assert all(record.chain.report.flagged() == ["zero_mode"] for record in records)
    assert records[0].convergence_status in ("converged", "not converged")


def test_parallel_run_matches_serial_run():
    config = models.ExperimentConfig(L=[3, 4], n_max=[1], beta=[1.0])
    serial = [flatten_record(record) for record in run_experiment(config, jobs=1)]
    parallel = [flatten_record(record) for record in run_experiment(config, jobs=2)]

    assert serial == parallel
