"""CSV report files. Every float is written with its shortest round-trip repr."""

from __future__ import annotations

import csv
from pathlib import Path

from .exceptions import ReportMissingError
from .metrics import METRIC_NAMES, OUTPUT_NAMES, PerformanceRecord, TestingRecord
from .training import EpochRecord, TrainingReport

TRAINING_HEADER = ("epoch", "train_mse", "cv_mse")
TESTING_HEADER = TestingRecord.columns()


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return path


def read_rows(path, what="report") -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.is_file():
        raise ReportMissingError(f"missing {what}: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ReportMissingError(f"{what} is empty: {path}")
    return rows[0], rows[1:]


def write_training_csv(report: TrainingReport, path) -> Path:
    return write_rows(path, TRAINING_HEADER, ((r.epoch, r.train_mse, r.cv_mse) for r in report.records))


def read_training_csv(path) -> list[EpochRecord]:
    _, rows = read_rows(path, "training report")
    return [EpochRecord(int(e), float(t), float(c)) for e, t, c in rows]


def performance_rows(perf: PerformanceRecord):
    for name in METRIC_NAMES:
        yield [name] + [getattr(perf[o], name) for o in OUTPUT_NAMES]


def write_performance_csv(perf: PerformanceRecord, path) -> Path:
    return write_rows(path, ("metric",) + OUTPUT_NAMES, performance_rows(perf))


def write_performance_table(perfs: dict, path) -> Path:
    """Several experiments side by side: one ``S``/``C`` column pair per key."""
    header = ["metric"] + [f"{o}_{key}" for key in perfs for o in OUTPUT_NAMES]
    rows = [
        [name] + [getattr(perf[o], name) for perf in perfs.values() for o in OUTPUT_NAMES]
        for name in METRIC_NAMES
    ]
    return write_rows(path, header, rows)


def read_performance_csv(path) -> dict[str, dict[str, float]]:
    header, rows = read_rows(path, "performance report")
    return {row[0]: {o: float(v) for o, v in zip(header[1:], row[1:])} for row in rows}


def write_testing_csv(records, path) -> Path:
    return write_rows(path, TESTING_HEADER, (r.as_tuple() for r in records))


def read_testing_csv(path) -> list[TestingRecord]:
    _, rows = read_rows(path, "testing report")
    return [TestingRecord(*map(float, row)) for row in rows]
