"""Score extracted components against annotated stories and write reports.

Node kinds are scored independently: personas against Persona nodes,
primary plus secondary actions against Action nodes, likewise entities,
and the benefit (when annotated) against Benefit nodes.  The benefit is a
full clause, so the relaxed mode is never applied to it.  Relationships are
scored as pairs where both members must match under the active mode.

Backlog results are arithmetic means over the defined per-story rows.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..corpus import AnnotatedStory, Backlog
from ..extraction.types import KgComponents
from ..model import NodeKind, RelKind, normalize_id
from .bertscore import Embedder, OneHotEmbedder, bertscore
from .compare import (
    DEFAULT_OPTIONS,
    QUALIFIER_STOP_LIST_VERSION,
    CompareOptions,
    ComparisonMode,
    Counts,
    compare_element,
    match_sets,
)
from .metrics import MetricRow, counts_to_row, mean_rows

log = logging.getLogger(__name__)

KIND_ORDER = ("Persona", "Action", "Entity", "Benefit")
BERTSCORE_MODE = "bertscore"
ALL_MODES = tuple(mode.value for mode in ComparisonMode) + (BERTSCORE_MODE,)

# Set-comparison modes applicable per node kind. The benefit clause is a
# sentence; substring leniency still makes sense, qualifier stripping not.
MODES_FOR_KIND = {
    "Persona": (ComparisonMode.STRICT, ComparisonMode.INCLUSIVE, ComparisonMode.RELAXED),
    "Action": (ComparisonMode.STRICT, ComparisonMode.INCLUSIVE, ComparisonMode.RELAXED),
    "Entity": (ComparisonMode.STRICT, ComparisonMode.INCLUSIVE, ComparisonMode.RELAXED),
    "Benefit": (ComparisonMode.STRICT, ComparisonMode.INCLUSIVE),
}

RELATION_ORDER = (RelKind.TRIGGERS.value, RelKind.TARGETS.value)

CSV_COLUMNS = (
    "backlog",
    "kind",
    "mode",
    "precision",
    "recall",
    "f_measure",
    "stories_counted",
    "stories_undefined",
)


def expected_lists(story: AnnotatedStory) -> dict[str, list[str]]:
    return {
        "Persona": list(story.personas),
        "Action": story.actions,
        "Entity": story.entities,
        "Benefit": [story.benefit] if story.benefit else [],
    }


def predicted_lists(components: KgComponents) -> dict[str, list[str]]:
    return {
        "Persona": components.nodes_of_kind(NodeKind.PERSONA),
        "Action": components.nodes_of_kind(NodeKind.ACTION),
        "Entity": components.nodes_of_kind(NodeKind.ENTITY),
        "Benefit": components.nodes_of_kind(NodeKind.BENEFIT),
    }


def _tokens(items: Sequence[str]) -> list[str]:
    return normalize_id(" ".join(items)).split() if items else []


def evaluate_story(
    story: AnnotatedStory,
    components: KgComponents,
    *,
    embedder: Embedder | None = None,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> dict[tuple[str, str], MetricRow | None]:
    """Score one story; None marks an undefined (no-signal) cell."""
    expected = expected_lists(story)
    predicted = predicted_lists(components)
    results: dict[tuple[str, str], MetricRow | None] = {}

    for kind in KIND_ORDER:
        for mode in MODES_FOR_KIND[kind]:
            counts = match_sets(expected[kind], predicted[kind], mode, options)
            results[(kind, mode.value)] = counts_to_row(counts)

        exp_tokens = _tokens(expected[kind])
        pred_tokens = _tokens(predicted[kind])
        if exp_tokens and pred_tokens:
            row = bertscore(exp_tokens, pred_tokens, embedder or OneHotEmbedder())
        else:
            row = None
        results[(kind, BERTSCORE_MODE)] = row
    return results


def _expected_pairs(story: AnnotatedStory) -> dict[str, list[tuple[str, str]]]:
    return {
        RelKind.TRIGGERS.value: list(story.triggers),
        RelKind.TARGETS.value: list(story.targets),
    }


def _predicted_pairs(components: KgComponents) -> dict[str, list[tuple[str, str]]]:
    pairs: dict[str, list[tuple[str, str]]] = {
        RelKind.TRIGGERS.value: [],
        RelKind.TARGETS.value: [],
    }
    for rel in components.relationships:
        if rel.kind.value in pairs:
            pairs[rel.kind.value].append((rel.source_id, rel.target_id))
    return pairs


def match_pair_sets(
    expected: Sequence[tuple[str, str]],
    predicted: Sequence[tuple[str, str]],
    mode: ComparisonMode,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> Counts:
    """Greedy pair matching; a pair matches when both members match."""
    consumed = [False] * len(predicted)
    counts = Counts()
    for exp_src, exp_tgt in expected:
        for i, (pred_src, pred_tgt) in enumerate(predicted):
            if (
                not consumed[i]
                and compare_element(exp_src, pred_src, mode, options)
                and compare_element(exp_tgt, pred_tgt, mode, options)
            ):
                consumed[i] = True
                counts.tp += 1
                break
        else:
            counts.fn += 1
    counts.fp = consumed.count(False)
    return counts


def evaluate_relations(
    story: AnnotatedStory,
    components: KgComponents,
    *,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> dict[tuple[str, str], MetricRow | None]:
    expected = _expected_pairs(story)
    predicted = _predicted_pairs(components)
    results: dict[tuple[str, str], MetricRow | None] = {}
    for label in RELATION_ORDER:
        for mode in ComparisonMode:
            counts = match_pair_sets(expected[label], predicted[label], mode, options)
            results[(label, mode.value)] = counts_to_row(counts)
    return results


@dataclass
class ReportRow:
    backlog: str
    kind: str
    mode: str
    precision: float
    recall: float
    f_measure: float
    stories_counted: int
    stories_undefined: int


@dataclass
class BacklogReport:
    backlog: str
    rows: list[ReportRow] = field(default_factory=list)
    relation_rows: list[ReportRow] = field(default_factory=list)
    stories_evaluated: int = 0
    stories_skipped: int = 0
    omitted: list[str] = field(default_factory=list)


def _aggregate(
    backlog_name: str,
    per_story: dict[tuple[str, str], list[MetricRow | None]],
    key_order: Sequence[tuple[str, str]],
) -> tuple[list[ReportRow], list[str]]:
    rows = []
    omitted = []
    for kind, mode in key_order:
        cells = per_story.get((kind, mode), [])
        defined = [cell for cell in cells if cell is not None]
        mean = mean_rows(defined)
        if mean is None:
            omitted.append(f"{kind}/{mode}")
            continue
        rows.append(
            ReportRow(
                backlog=backlog_name,
                kind=kind,
                mode=mode,
                precision=mean.precision,
                recall=mean.recall,
                f_measure=mean.f_measure,
                stories_counted=len(defined),
                stories_undefined=len(cells) - len(defined),
            )
        )
    return rows, omitted


def evaluate_backlog(
    backlog: Backlog,
    extractions: Mapping[str, KgComponents],
    *,
    embedder: Embedder | None = None,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> BacklogReport:
    """Score every story that has an extraction; others count as skipped."""
    per_story: dict[tuple[str, str], list[MetricRow | None]] = {}
    per_story_rel: dict[tuple[str, str], list[MetricRow | None]] = {}
    evaluated = 0
    skipped = 0
    shared_embedder = embedder or OneHotEmbedder()

    for story in backlog.stories:
        components = extractions.get(story.pid)
        if components is None:
            skipped += 1
            log.warning("no extraction for story %s in backlog %s", story.pid, backlog.name)
            continue
        evaluated += 1
        for key, row in evaluate_story(
            story, components, embedder=shared_embedder, options=options
        ).items():
            per_story.setdefault(key, []).append(row)
        for key, row in evaluate_relations(story, components, options=options).items():
            per_story_rel.setdefault(key, []).append(row)

    node_keys = [
        (kind, mode)
        for kind in KIND_ORDER
        for mode in [m.value for m in MODES_FOR_KIND[kind]] + [BERTSCORE_MODE]
    ]
    rel_keys = [
        (label, mode.value) for label in RELATION_ORDER for mode in ComparisonMode
    ]
    rows, omitted = _aggregate(backlog.name, per_story, node_keys)
    relation_rows, rel_omitted = _aggregate(backlog.name, per_story_rel, rel_keys)
    return BacklogReport(
        backlog=backlog.name,
        rows=rows,
        relation_rows=relation_rows,
        stories_evaluated=evaluated,
        stories_skipped=skipped,
        omitted=omitted + rel_omitted,
    )


@dataclass
class ExperimentReport:
    experiment: str
    backlogs: list[BacklogReport] = field(default_factory=list)
    options: CompareOptions = DEFAULT_OPTIONS

    def average_rows(self) -> list[ReportRow]:
        """Macro average across backlogs per (kind, mode)."""
        grouped: dict[tuple[str, str], list[ReportRow]] = {}
        order: list[tuple[str, str]] = []
        for report in self.backlogs:
            for row in report.rows + report.relation_rows:
                key = (row.kind, row.mode)
                if key not in grouped:
                    grouped[key] = []
                    order.append(key)
                grouped[key].append(row)
        averages = []
        for key in order:
            rows = grouped[key]
            n = len(rows)
            averages.append(
                ReportRow(
                    backlog="(average)",
                    kind=key[0],
                    mode=key[1],
                    precision=sum(r.precision for r in rows) / n,
                    recall=sum(r.recall for r in rows) / n,
                    f_measure=sum(r.f_measure for r in rows) / n,
                    stories_counted=sum(r.stories_counted for r in rows),
                    stories_undefined=sum(r.stories_undefined for r in rows),
                )
            )
        return averages


def _row_dict(row: ReportRow) -> dict:
    return {
        "backlog": row.backlog,
        "kind": row.kind,
        "mode": row.mode,
        "precision": row.precision,
        "recall": row.recall,
        "f_measure": row.f_measure,
        "stories_counted": row.stories_counted,
        "stories_undefined": row.stories_undefined,
    }


def report_to_dict(report: ExperimentReport) -> dict:
    return {
        "experiment": report.experiment,
        "options": {
            "fold_plurals": report.options.fold_plurals,
            "token_boundary": report.options.token_boundary,
            "qualifier_stop_list_version": QUALIFIER_STOP_LIST_VERSION,
        },
        "backlogs": [
            {
                "backlog": b.backlog,
                "stories_evaluated": b.stories_evaluated,
                "stories_skipped": b.stories_skipped,
                "rows": [_row_dict(row) for row in b.rows],
                "relations": [_row_dict(row) for row in b.relation_rows],
                "omitted": list(b.omitted),
            }
            for b in report.backlogs
        ],
        "averages": [_row_dict(row) for row in report.average_rows()],
    }


def report_to_csv(report: ExperimentReport) -> str:
    """Flat CSV of node-kind rows plus cross-backlog averages.

    Deterministic: no timestamps, fixed column list, fixed float format.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)

    def emit(row: ReportRow) -> None:
        writer.writerow(
            [
                row.backlog,
                row.kind,
                row.mode,
                f"{row.precision:.6f}",
                f"{row.recall:.6f}",
                f"{row.f_measure:.6f}",
                row.stories_counted,
                row.stories_undefined,
            ]
        )

    for backlog_report in report.backlogs:
        for row in backlog_report.rows:
            emit(row)
    for row in report.average_rows():
        if row.kind in KIND_ORDER:
            emit(row)
    return buffer.getvalue()


def write_report_files(report: ExperimentReport, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    csv_path = out_dir / "report.csv"
    json_path.write_text(
        json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    csv_path.write_text(report_to_csv(report), encoding="utf-8")
    return json_path, csv_path


def strict_f_table(report: ExperimentReport) -> str:
    """Per-backlog strict F-measures, one column per node kind.

    Column order mirrors the usual presentation: Persona, Entity, Action,
    Benefit.
    """
    columns = ("Persona", "Entity", "Action", "Benefit")
    lines = []
    header = f"{'backlog':<14}" + "".join(f"{c:>10}" for c in columns)
    lines.append(header)
    lines.append("-" * len(header))

    def line(name: str, rows: list[ReportRow]) -> str:
        by_kind = {row.kind: row for row in rows if row.mode == ComparisonMode.STRICT.value}
        cells = []
        for kind in columns:
            row = by_kind.get(kind)
            cells.append(f"{row.f_measure:>10.2f}" if row else f"{'-':>10}")
        return f"{name:<14}" + "".join(cells)

    for backlog_report in report.backlogs:
        lines.append(line(backlog_report.backlog, backlog_report.rows))
    lines.append(line("Average", report.average_rows()))
    return "\n".join(lines)
