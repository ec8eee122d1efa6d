"""Regression metrics for the two network outputs and the per-sample testing table."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .datasets import Dataset
from .exceptions import CorrelationUndefinedError, DataError, DimensionError
from .network import CanfisNetwork, predict

OUTPUT_NAMES = ("S", "C")
METRIC_NAMES = ("mse", "nmse", "mae", "min_abs_error", "max_abs_error", "r")


@dataclass(frozen=True)
class OutputPerformance:
    mse: float
    nmse: float
    mae: float
    min_abs_error: float
    max_abs_error: float
    r: float


@dataclass(frozen=True)
class PerformanceRecord:
    s: OutputPerformance
    c: OutputPerformance

    def __getitem__(self, output: str) -> OutputPerformance:
        return {"S": self.s, "C": self.c}[output.upper()]


@dataclass(frozen=True)
class TestingRecord:
    __test__ = False  # not a pytest class

    x: float
    y: float
    desired_s: float
    desired_c: float
    output_s: float
    output_c: float

    @classmethod
    def columns(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


def _population_variance(values: np.ndarray) -> float:
    return float(np.mean((values - values.mean()) ** 2))


def nmse(mse: float, desired) -> float:
    """``mse`` normalized by the population variance (divide by N) of ``desired``."""
    desired = np.asarray(desired, dtype=float)
    var = _population_variance(desired)
    if var == 0:
        raise CorrelationUndefinedError("desired values are constant; NMSE is undefined")
    return mse / var


def pearson_r(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"pearson_r needs two 1-d series of equal length, got {a.shape} and {b.shape}")
    if a.size < 2:
        raise DimensionError("pearson_r needs at least two points")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0 or sbb == 0:
        raise CorrelationUndefinedError("correlation is undefined for a constant series")
    r = float(np.dot(da, db)) / np.sqrt(saa * sbb)
    return float(np.clip(r, -1.0, 1.0))


def output_performance(desired, actual, output: str | None = None) -> OutputPerformance:
    desired = np.asarray(desired, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if desired.shape != actual.shape or desired.size == 0:
        raise DimensionError("desired and actual must be non-empty and equal in length")
    err = desired - actual
    abs_err = np.abs(err)
    mse = float(np.mean(err**2))
    try:
        normalized = nmse(mse, desired)
        r = pearson_r(desired, actual)
    except CorrelationUndefinedError as exc:
        raise CorrelationUndefinedError(f"output {output}: {exc}", output=output) from exc
    return OutputPerformance(
        mse=mse,
        nmse=normalized,
        mae=float(np.mean(abs_err)),
        min_abs_error=float(abs_err.min()),
        max_abs_error=float(abs_err.max()),
        r=r,
    )


def testing_records(net: CanfisNetwork, data: Dataset) -> list[TestingRecord]:
    outputs = predict(net, data.X)
    return [
        TestingRecord(s.x, s.y, s.s, s.c, float(o[0]), float(o[1]))
        for s, o in zip(data, outputs)
    ]


def performance_from_records(records: list[TestingRecord]) -> PerformanceRecord:
    arr = np.array([r.as_tuple() for r in records], dtype=float)
    return PerformanceRecord(
        s=output_performance(arr[:, 2], arr[:, 4], "S"),
        c=output_performance(arr[:, 3], arr[:, 5], "C"),
    )


def evaluate(net: CanfisNetwork, test_set: Dataset) -> tuple[PerformanceRecord, list[TestingRecord]]:
    if len(test_set) == 0:
        raise DataError("cannot evaluate on an empty dataset")
    records = testing_records(net, test_set)
    return performance_from_records(records), records


def binary_fidelity(records, threshold: float = 0.5) -> tuple[bool, list[dict]]:
    """Round both outputs at ``threshold`` (ties go to 1) and compare with the targets.

    Returns the overall verdict and one row per sample.
    """
    if not records:
        raise DataError("binary_fidelity needs at least one record")
    table = []
    for rec in records:
        s_bit = int(rec.output_s >= threshold)
        c_bit = int(rec.output_c >= threshold)
        ok = s_bit == rec.desired_s and c_bit == rec.desired_c
        table.append({"x": rec.x, "y": rec.y, "s_bit": s_bit, "c_bit": c_bit, "match": ok})
    return all(row["match"] for row in table), table
