"""Report record storage and the CSV / JSON writers."""
from __future__ import annotations

import csv
import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from .models import ConvergenceTable, ExperimentConfig, ReportRecord
from .reporting import CONVERGENCE_COLUMNS, REPORT_COLUMNS, convergence_rows, flatten_record, record_to_dict

PathLike = Union[str, Path]


class ReportStore(ABC):
    """Records of one sweep keyed by grid point.

    A stored record is reused by a later run only if it succeeded under the same config hash.
    """

    @abstractmethod
    def save(self, record: ReportRecord) -> None:
        raise NotImplementedError

    @abstractmethod
    def load(self, key: str) -> Optional[ReportRecord]:
        raise NotImplementedError

    @abstractmethod
    def keys(self) -> List[str]:
        raise NotImplementedError

    def records(self) -> List[ReportRecord]:
        found = [self.load(key) for key in self.keys()]
        return [record for record in found if record is not None]

    def completed(self, key: str, config_hash: str) -> Optional[ReportRecord]:
        record = self.load(key)
        if record is None or not record.ok or record.config_hash != config_hash:
            return None
        return record


class InMemoryReportStore(ReportStore):
    """Grid-point records in first-save order."""

    def __init__(self) -> None:
        self._records: Dict[str, ReportRecord] = {}

    def save(self, record: ReportRecord) -> None:
        self._records[record.params.key()] = record

    def load(self, key: str) -> Optional[ReportRecord]:
        return self._records.get(key)

    def keys(self) -> List[str]:
        return list(self._records)


def _prepare(path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target


def write_report_csv(records: Iterable[ReportRecord], path: PathLike) -> Path:
    target = _prepare(path)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow(flatten_record(record))
    return target


def write_report_json(
    records: Iterable[ReportRecord],
    path: PathLike,
    config: Optional[ExperimentConfig] = None,
) -> Path:
    target = _prepare(path)
    payload = {
        "config": None if config is None else config.to_dict(),
        "records": [record_to_dict(record, config) for record in records],
    }
    target.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return target


def write_convergence_csv(tables: Iterable[ConvergenceTable], path: PathLike) -> Path:
    target = _prepare(path)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CONVERGENCE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for table in tables:
            writer.writerows(convergence_rows(table))
    return target


__all__ = [
    "InMemoryReportStore",
    "ReportStore",
    "write_convergence_csv",
    "write_report_csv",
    "write_report_json",
]
