"""Extraction quality scoring."""

from .bertscore import Embedder, HttpEmbedder, OneHotEmbedder, bertscore
from .compare import (
    DEFAULT_OPTIONS,
    QUALIFIER_STOP_LIST,
    QUALIFIER_STOP_LIST_VERSION,
    CompareOptions,
    ComparisonMode,
    Counts,
    compare_element,
    match_sets,
    strip_qualifiers,
)
from .metrics import MetricRow, counts_to_row, f_measure, mean_rows, precision, recall
from .report import (
    ALL_MODES,
    BERTSCORE_MODE,
    CSV_COLUMNS,
    KIND_ORDER,
    BacklogReport,
    ExperimentReport,
    ReportRow,
    evaluate_backlog,
    evaluate_relations,
    evaluate_story,
    expected_lists,
    match_pair_sets,
    predicted_lists,
    report_to_csv,
    report_to_dict,
    strict_f_table,
    write_report_files,
)

__all__ = [
    "Embedder",
    "HttpEmbedder",
    "OneHotEmbedder",
    "bertscore",
    "DEFAULT_OPTIONS",
    "QUALIFIER_STOP_LIST",
    "QUALIFIER_STOP_LIST_VERSION",
    "CompareOptions",
    "ComparisonMode",
    "Counts",
    "compare_element",
    "match_sets",
    "strip_qualifiers",
    "MetricRow",
    "counts_to_row",
    "f_measure",
    "mean_rows",
    "precision",
    "recall",
    "ALL_MODES",
    "BERTSCORE_MODE",
    "CSV_COLUMNS",
    "KIND_ORDER",
    "BacklogReport",
    "ExperimentReport",
    "ReportRow",
    "evaluate_backlog",
    "evaluate_relations",
    "evaluate_story",
    "expected_lists",
    "match_pair_sets",
    "predicted_lists",
    "report_to_csv",
    "report_to_dict",
    "strict_f_table",
    "write_report_files",
]
