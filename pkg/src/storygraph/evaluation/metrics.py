"""Precision, recall, F-measure with explicit undefined handling.

A story where a kind has nothing expected and nothing predicted gives no
signal: both denominators are zero.  Such rows are "undefined" and excluded
from averages instead of polluting them with an arbitrary filler value.
When only one denominator is zero the corresponding metric is 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .compare import Counts


@dataclass(frozen=True)
class MetricRow:
    precision: float
    recall: float
    f_measure: float


def precision(counts: Counts) -> float:
    denom = counts.tp + counts.fp
    return counts.tp / denom if denom else 0.0


def recall(counts: Counts) -> float:
    denom = counts.tp + counts.fn
    return counts.tp / denom if denom else 0.0


def f_measure(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def counts_to_row(counts: Counts) -> MetricRow | None:
    """None when the counts carry no signal (both denominators zero)."""
    if counts.tp + counts.fp == 0 and counts.tp + counts.fn == 0:
        return None
    p = precision(counts)
    r = recall(counts)
    return MetricRow(precision=p, recall=r, f_measure=f_measure(p, r))


def mean_rows(rows: list[MetricRow]) -> MetricRow | None:
    """Arithmetic mean of defined rows; None when nothing is defined."""
    if not rows:
        return None
    n = len(rows)
    return MetricRow(
        precision=sum(row.precision for row in rows) / n,
        recall=sum(row.recall for row in rows) / n,
        f_measure=sum(row.f_measure for row in rows) / n,
    )
