"""Helpers for presenting chain reports, convergence scans and check results."""
from __future__ import annotations

from typing import Any, Dict, List, Optional, Sequence

from . import models
from .validators import LINK_KEYS

STATUS_ICON = {
    models.LinkState.PASS: "✅",
    models.LinkState.FLAG: "❌",
    models.LinkState.UNKNOWN: "⚠️",
}

META_COLUMNS = ["version", "config_hash", "seed", "status", "convergence_status", "errors"]
PARAM_COLUMNS = ["d", "L", "L_A", "n_max", "n_cap", "beta", "J", "U", "mu", "gamma"]
VALUE_COLUMNS = [
    "exact_mi",
    "lemma1_value",
    "prop1_value",
    "prop2_value",
    "prop2_relaxed_value",
    "step3_value",
    "theorem_value",
    "main_constant",
    "c0",
    "entropy_ab",
    "entropy_a",
    "entropy_b",
    "n_expectation",
    "n_bound_free",
    "n_bound_step3",
    "boundary_bonds",
    "boundary_weight",
    "g",
    "f_value",
    "f_error",
    "epsilon1",
    "epsilon2",
    "lemma_s3_rhs",
    "zero_mode_bound",
    "pb_literal_lhs",
    "pb_literal_rhs",
    "pb_exact_lhs",
    "pb_exact_rhs",
    "trace_distance",
    "pinsker_slack",
    "translation_spread",
    "wick_pair_ed",
    "wick_pair_quasifree",
    "square_moment_ed",
    "square_moment_quasifree",
    "basis_dimension",
]
SLACK_COLUMNS = [
    "slack_mi_lemma1",
    "slack_lemma1_prop1",
    "slack_prop1_prop2",
    "slack_prop2_step3",
    "slack_step3_theorem",
    "slack_prop2_theorem",
]
LINK_COLUMNS = [f"link_{key}" for key in LINK_KEYS]
REPORT_COLUMNS = META_COLUMNS + PARAM_COLUMNS + VALUE_COLUMNS + SLACK_COLUMNS + LINK_COLUMNS

CONVERGENCE_COLUMNS = ["L", "beta", "n_max", "exact_mi", "n_expectation", "mi_difference", "n_difference", "status"]


def format_number(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def build_link_rows(report: models.ChainReport) -> List[Dict[str, str]]:
    rows: List[Dict[str, str]] = []
    for key, status in report.links.items():
        rows.append(
            {
                "label": key,
                "status": status.state.name,
                "icon": STATUS_ICON.get(status.state, ""),
                "slack": format_number(status.slack),
                "message": status.message,
            }
        )
    return rows


def record_status(record: models.ReportRecord) -> str:
    if record.errors:
        return "error"
    if record.chain is None:
        return models.ChainOutcome.UNKNOWN.value
    return record.chain.report.overall_status.value


def flatten_record(record: models.ReportRecord) -> Dict[str, str]:
    """One CSV row in REPORT_COLUMNS order; wall time is left out so reruns compare equal."""
    params = record.params
    row: Dict[str, str] = {
        "version": record.version,
        "config_hash": record.config_hash,
        "seed": format_number(record.seed),
        "status": record_status(record),
        "convergence_status": record.convergence_status,
        "errors": "; ".join(f"{error.kind.value}: {error.message}" for error in record.errors),
    }
    for column in PARAM_COLUMNS:
        row[column] = format_number(getattr(params, column))
    chain = record.chain
    if chain is not None and params.gamma is None:
        row["gamma"] = format_number(chain.gamma)
    for column in VALUE_COLUMNS:
        row[column] = "" if chain is None else format_number(getattr(chain, column))
    slacks = chain.slacks if chain is not None else {}
    for column in SLACK_COLUMNS:
        row[column] = format_number(slacks.get(column))
    for key, column in zip(LINK_KEYS, LINK_COLUMNS):
        status = chain.report.links.get(key) if chain is not None else None
        row[column] = "" if status is None else status.state.value
    return row


def _link_payload(report: models.ChainReport) -> Dict[str, Dict[str, Any]]:
    return {
        key: {"state": status.state.value, "slack": status.slack, "message": status.message}
        for key, status in report.links.items()
    }


def record_to_dict(record: models.ReportRecord, config: Optional[models.ExperimentConfig] = None) -> Dict[str, Any]:
    """Nested JSON payload; carries the config so a record can be re-run on its own."""
    chain = record.chain
    payload: Dict[str, Any] = {
        "version": record.version,
        "config_hash": record.config_hash,
        "seed": record.seed,
        "wall_time": record.wall_time,
        "status": record_status(record),
        "convergence_status": record.convergence_status,
        "params": {column: getattr(record.params, column) for column in PARAM_COLUMNS},
        "errors": [{"kind": error.kind.value, "message": error.message} for error in record.errors],
        "warnings": list(record.warnings),
    }
    payload["params"]["quad_tol"] = record.params.quad_tol
    payload["params"]["dimension_guard"] = record.params.dimension_guard
    if config is not None:
        payload["config"] = config.to_dict()
    if chain is not None:
        payload["values"] = {column: getattr(chain, column) for column in VALUE_COLUMNS}
        payload["values"]["gamma"] = chain.gamma
        payload["slacks"] = chain.slacks
        payload["links"] = _link_payload(chain.report)
    return payload


def render_table(rows: Sequence[Dict[str, str]], columns: Sequence[str]) -> str:
    widths = {column: len(column) for column in columns}
    for row in rows:
        for column in columns:
            widths[column] = max(widths[column], len(row.get(column, "")))
    header = "  ".join(column.ljust(widths[column]) for column in columns)
    rule = "  ".join("-" * widths[column] for column in columns)
    body = ["  ".join(row.get(column, "").ljust(widths[column]) for column in columns) for row in rows]
    return "\n".join([header, rule, *body])


def spectrum_rows(table: models.SpectrumTable) -> List[Dict[str, str]]:
    rows = []
    for index, (value, label) in enumerate(zip(table.eigenvalues, table.labels), start=1):
        rows.append({"index": str(index), "eigenvalue": format_number(float(value)), "vector": label})
    return rows


def render_spectrum(
    table: models.SpectrumTable,
    residuals: Dict[str, float],
    tensor_values: Optional[Sequence[float]] = None,
    tensor_residual: Optional[float] = None,
    d: int = 1,
) -> str:
    lines = [f"chain Laplacian, L={table.L}", render_table(spectrum_rows(table), ["index", "eigenvalue", "vector"]), ""]
    multiplicity_rows = [
        {"eigenvalue": format_number(value), "multiplicity": str(count)}
        for value, count in table.multiplicities().items()
    ]
    lines.append(render_table(multiplicity_rows, ["eigenvalue", "multiplicity"]))
    lines.append("")
    residual_rows = [{"check": name, "residual": f"{value:.3e}"} for name, value in residuals.items()]
    if tensor_residual is not None:
        residual_rows.append({"check": f"tensor_sum_d{d}", "residual": f"{tensor_residual:.3e}"})
    lines.append(render_table(residual_rows, ["check", "residual"]))
    if tensor_values is not None and d > 1:
        lines.append("")
        lines.append(f"distinct d={d} eigenvalues: " + ", ".join(format_number(float(v)) for v in tensor_values))
    return "\n".join(lines)


def convergence_rows(table: models.ConvergenceTable) -> List[Dict[str, str]]:
    rows = []
    for row in table.rows:
        rows.append(
            {
                "L": str(table.L),
                "beta": format_number(table.beta),
                "n_max": str(row.n_max),
                "exact_mi": format_number(row.exact_mi),
                "n_expectation": format_number(row.n_expectation),
                "mi_difference": format_number(row.mi_difference),
                "n_difference": format_number(row.n_difference),
                "status": table.status,
            }
        )
    return rows


def render_convergence(table: models.ConvergenceTable) -> str:
    summary = f"L={table.L} beta={format_number(table.beta)}: {table.status} (tol {table.tolerance:g})"
    if table.note:
        summary += f" - {table.note}"
    return "\n".join([summary, render_table(convergence_rows(table), CONVERGENCE_COLUMNS)])


def check_rows(results: Sequence[models.CheckResult]) -> List[Dict[str, str]]:
    rows = []
    for result in results:
        state = models.LinkState.PASS if result.passed else models.LinkState.FLAG
        rows.append(
            {
                "check": result.name,
                "icon": STATUS_ICON[state],
                "cases": str(result.cases),
                "worst_slack": format_number(result.worst_slack),
                "tolerance": format_number(result.tolerance),
            }
        )
    return rows


def summarize_record(record: models.ReportRecord) -> str:
    params = record.params
    head = f"L={params.L} n_max={params.n_max} beta={format_number(params.beta)}: {record_status(record)}"
    if record.chain is None:
        return head
    detail = render_table(build_link_rows(record.chain.report), ["icon", "label", "slack", "message"])
    return f"{head}\n{detail}"


__all__ = [
    "CONVERGENCE_COLUMNS",
    "REPORT_COLUMNS",
    "STATUS_ICON",
    "build_link_rows",
    "check_rows",
    "convergence_rows",
    "flatten_record",
    "format_number",
    "record_status",
    "record_to_dict",
    "render_convergence",
    "render_spectrum",
    "render_table",
    "spectrum_rows",
    "summarize_record",
]
