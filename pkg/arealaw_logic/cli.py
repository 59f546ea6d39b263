"""Command-line interface: run, converge, spectrum and check subcommands."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import models
from .checks import CheckSuiteFactory
from .controller import converge, exit_code, run_checks, run_experiment
from .lattice import build_lattice, chain_spectrum, laplacian_matrix, spectrum_residuals, tensor_spectrum
from .persistence import InMemoryReportStore, write_convergence_csv, write_report_csv, write_report_json
from .reporting import check_rows, render_convergence, render_spectrum, render_table, summarize_record
from .settings import ConfigError, get_int_setting, get_setting, load_config, validate_config

logger = logging.getLogger(__name__)

REPORT_CSV = "report.csv"
REPORT_JSON = "report.json"
CONVERGENCE_CSV = "convergence.csv"
TENSOR_CHECK_LIMIT = 4096


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--log-level", default=None, help="logging level (default AREALAW_LOG_LEVEL or WARNING)")
    return parent


def _experiment_options(common: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False, parents=[common])
    parent.add_argument("--config", required=True, help="key = value or JSON experiment config")
    parent.add_argument("--jobs", type=int, default=None, help="worker processes (default AREALAW_JOBS)")
    parent.add_argument("--out", default=None, help="output directory (overrides the config)")
    parent.add_argument("--seed", type=int, default=None, help="seed recorded in the report (overrides the config)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    experiment = _experiment_options(common)
    parser = argparse.ArgumentParser(
        prog="arealaw",
        description="Numerical verification of the Bose-Hubbard thermal area-law inequality chain.",
    )
    subcommands = parser.add_subparsers(dest="command", required=True)
    subcommands.add_parser("run", parents=[experiment], help="evaluate the chain on every grid point")
    subcommands.add_parser("converge", parents=[experiment], help="scan exact I(A:B) and <N> against n_max")

    spectrum = subcommands.add_parser("spectrum", parents=[common], help="print the chain Laplacian spectrum")
    spectrum.add_argument("--L", type=int, required=True, dest="L")
    spectrum.add_argument("--d", type=int, default=1, dest="d")

    check = subcommands.add_parser("check", parents=[common], help="run the matrix-inequality suites")
    check.add_argument("--seed", type=int, default=None)
    check.add_argument(
        "--suite",
        action="append",
        choices=CheckSuiteFactory.build_default().names(),
        help="suite to run (repeatable, default all)",
    )
    return parser


def configure_logging(level: Optional[str]) -> None:
    name = (level or get_setting("AREALAW_LOG_LEVEL") or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, name, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _load(args: argparse.Namespace) -> models.ExperimentConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    validate_config(config)
    return config


def _jobs(args: argparse.Namespace) -> int:
    jobs = args.jobs if args.jobs is not None else get_int_setting("AREALAW_JOBS")
    return max(1, int(jobs or 1))


def command_run(args: argparse.Namespace) -> int:
    config = _load(args)
    store = InMemoryReportStore()
    run_experiment(config, jobs=_jobs(args), store=store)
    records = store.records()
    out = Path(config.out)
    write_report_csv(records, out / REPORT_CSV)
    write_report_json(records, out / REPORT_JSON, config)
    for record in records:
        print(summarize_record(record))
        for error in record.errors:
            print(f"  error ({error.kind.value}): {error.message}", file=sys.stderr)
    print(f"wrote {out / REPORT_CSV} and {out / REPORT_JSON}")
    return exit_code(records)


def command_converge(args: argparse.Namespace) -> int:
    config = _load(args)
    tables = converge(config)
    out = Path(config.out)
    write_convergence_csv(tables, out / CONVERGENCE_CSV)
    for table in tables:
        print(render_convergence(table))
        if table.selected_n_max is not None:
            print(f"selected n_max = {table.selected_n_max}")
    print(f"wrote {out / CONVERGENCE_CSV}")
    return 0


def tensor_residual(L: int, d: int) -> Optional[float]:
    """Tensor-sum spectrum against direct diagonalisation; None above TENSOR_CHECK_LIMIT sites."""
    if L**d > TENSOR_CHECK_LIMIT:
        return None
    direct = np.linalg.eigvalsh(laplacian_matrix(build_lattice(d, L)))
    return float(np.max(np.abs(tensor_spectrum(L, d) - direct)))


def command_spectrum(args: argparse.Namespace) -> int:
    if args.L < 2 or args.d < 1:
        raise ConfigError(f"spectrum needs L >= 2 and d >= 1, got L={args.L}, d={args.d}")
    table = chain_spectrum(args.L)
    residuals = spectrum_residuals(table)
    tensor_values = None
    residual = None
    if args.d > 1:
        tensor_values = np.unique(np.round(tensor_spectrum(args.L, args.d), 10))
        residual = tensor_residual(args.L, args.d)
    print(render_spectrum(table, residuals, tensor_values, residual, args.d))
    return 0


def command_check(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else get_int_setting("AREALAW_SEED")
    if seed < 0:
        raise ConfigError(f"seed must be >= 0, got {seed}")
    results = run_checks(seed, args.suite)
    print(render_table(check_rows(results), ["icon", "check", "cases", "worst_slack", "tolerance"]))
    for result in results:
        for detail in result.details:
            print(f"  {result.name}: {detail}")
    return 0 if all(result.passed for result in results) else models.ErrorKind.NUMERICAL.exit_code


COMMANDS = {
    "run": command_run,
    "converge": command_converge,
    "spectrum": command_spectrum,
    "check": command_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(list(argv) if argv is not None else None)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return models.ErrorKind.CONFIG.exit_code


__all__ = ["build_parser", "configure_logging", "main", "tensor_residual"]
