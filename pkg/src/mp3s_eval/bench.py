"""Cross-probe benchmark analysis: correlations, rankings, and differences.

A :class:`BenchTable` holds per-(encoder, task, probe_set) metric values
with an explicit direction (lower_better or higher_better) and optional
probe parameter counts.  On top of it this module computes:

* Pearson and Spearman correlation between two encoder-aligned columns;
* per-column means and the signed relative difference in means, where
  positive always means the second column is better;
* direction-aware rankings with average ranks on ties;
* the per-encoder best value over probe sets, optionally under a
  parameter-count capacity limit.

Columns are matched by encoder; a mismatch fails loudly with the missing
encoders rather than silently dropping rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import TableError

DIRECTIONS = ("lower_better", "higher_better")


@dataclass(frozen=True)
class MetricValue:
    """One benchmark cell: a metric value with its direction."""

    encoder: str
    task: str
    probe_set: str
    metric: str
    value: float
    direction: str

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise TableError(
                f"direction must be one of {DIRECTIONS}, got '{self.direction}'"
            )
        if not np.isfinite(self.value):
            raise TableError(
                f"non-finite value for ({self.encoder}, {self.task}, "
                f"{self.probe_set}, {self.metric})"
            )


@dataclass(frozen=True)
class BenchTable:
    """Validated benchmark rows plus optional probe parameter counts."""

    rows: tuple[MetricValue, ...]
    probe_params: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen: set[tuple[str, str, str, str]] = set()
        directions: dict[tuple[str, str], str] = {}
        for row in self.rows:
            key = (row.encoder, row.task, row.probe_set, row.metric)
            if key in seen:
                raise TableError(f"duplicate table entry {key}")
            seen.add(key)
            dir_key = (row.task, row.metric)
            if directions.setdefault(dir_key, row.direction) != row.direction:
                raise TableError(
                    f"conflicting directions for task '{row.task}' metric '{row.metric}'"
                )

    def column(self, task: str, metric: str, probe_set: str) -> tuple[dict[str, float], str]:
        """Encoder → value mapping and direction for one table column."""
        values: dict[str, float] = {}
        direction = ""
        for row in self.rows:
            if (row.task, row.metric, row.probe_set) == (task, metric, probe_set):
                values[row.encoder] = row.value
                direction = row.direction
        if not values:
            raise TableError(f"no values for task '{task}' metric '{metric}' set '{probe_set}'")
        return values, direction

    def probe_sets(self, task: str, metric: str) -> list[str]:
        """Sorted probe sets holding values for (task, metric)."""
        return sorted(
            {r.probe_set for r in self.rows if (r.task, r.metric) == (task, metric)}
        )

    def metrics(self, task: str) -> list[str]:
        """Sorted metric names present for a task."""
        return sorted({r.metric for r in self.rows if r.task == task})


_CSV_COLUMNS = ("encoder", "task", "probe_set", "metric", "value", "direction", "probe_params")


def table_from_csv(path: str | Path) -> BenchTable:
    """Read a benchmark CSV (columns: encoder,task,probe_set,metric,value,
    direction and optional probe_params constant per (task, probe_set))."""
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise TableError(f"cannot read benchmark table: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise TableError(f"{path}: empty CSV")
        missing = [c for c in _CSV_COLUMNS[:6] if c not in reader.fieldnames]
        if missing:
            raise TableError(f"{path}: missing CSV columns {missing}")
        rows: list[MetricValue] = []
        params: dict[tuple[str, str], float] = {}
        for lineno, rec in enumerate(reader, start=2):
            try:
                value = float(rec["value"])
            except ValueError as exc:
                raise TableError(f"{path}: line {lineno}: bad value {rec['value']!r}") from exc
            rows.append(
                MetricValue(
                    encoder=rec["encoder"],
                    task=rec["task"],
                    probe_set=rec["probe_set"],
                    metric=rec["metric"],
                    value=value,
                    direction=rec["direction"],
                )
            )
            raw_params = (rec.get("probe_params") or "").strip()
            if raw_params:
                key = (rec["task"], rec["probe_set"])
                parsed = float(raw_params)
                if params.setdefault(key, parsed) != parsed:
                    raise TableError(
                        f"{path}: line {lineno}: probe_params for {key} conflicts "
                        f"with an earlier row"
                    )
    return BenchTable(rows=tuple(rows), probe_params=params)


def table_to_csv(table: BenchTable, path: str | Path) -> None:
    """Write a benchmark table in the CSV schema of :func:`table_from_csv`."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(_CSV_COLUMNS)
        for row in sorted(
            table.rows, key=lambda r: (r.task, r.probe_set, r.metric, r.encoder)
        ):
            params = table.probe_params.get((row.task, row.probe_set), "")
            writer.writerow(
                [
                    row.encoder,
                    row.task,
                    row.probe_set,
                    row.metric,
                    repr(row.value),
                    row.direction,
                    "" if params == "" else repr(params),
                ]
            )


def _validated_pair(x: Iterable[float], y: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    vx = np.asarray(list(x), dtype=np.float64)
    vy = np.asarray(list(y), dtype=np.float64)
    if vx.shape != vy.shape:
        raise TableError(f"length mismatch: {vx.shape[0]} vs {vy.shape[0]}")
    if vx.size < 2:
        raise TableError("correlation needs at least 2 points")
    if np.ptp(vx) == 0 or np.ptp(vy) == 0:
        raise TableError("correlation undefined for zero-variance input")
    return vx, vy


def pearson(x: Iterable[float], y: Iterable[float]) -> float:
    """Sample Pearson correlation coefficient."""
    vx, vy = _validated_pair(x, y)
    return float(np.corrcoef(vx, vy)[0, 1])


def spearman(x: Iterable[float], y: Iterable[float]) -> float:
    """Spearman rank correlation (average ranks on ties)."""
    vx, vy = _validated_pair(x, y)
    return pearson(rankdata(vx), rankdata(vy))


def rank_models(
    table: BenchTable, task: str, metric: str, probe_set: str
) -> tuple[tuple[str, float, float], ...]:
    """Direction-aware ranking: rank 1 is best, ties get average ranks.

    Returns:
        (encoder, value, rank) tuples sorted by rank then encoder.
    """
    values, direction = table.column(task, metric, probe_set)
    encoders = sorted(values)
    vec = np.asarray([values[e] for e in encoders], dtype=np.float64)
    ranks = rankdata(vec if direction == "lower_better" else -vec)
    triples = [(e, values[e], float(r)) for e, r in zip(encoders, ranks)]
    triples.sort(key=lambda t: (t[2], t[0]))
    return tuple(triples)


@dataclass(frozen=True)
class ReportColumn:
    """Identifies one compared column and its direction."""

    task: str
    metric: str
    probe_set: str
    direction: str
    label: str


@dataclass(frozen=True)
class ComparisonReport:
    """Correlations, means, relative difference, and rankings for a pair."""

    columns: tuple[ReportColumn, ReportColumn]
    n: int
    pearson: float
    spearman: float
    mean_1: float
    mean_2: float
    diff_percent: float | None
    rankings: tuple[tuple[tuple[str, float, float], ...], ...]
    notes: tuple[str, ...] = ()

    def with_notes(self, *notes: str) -> "ComparisonReport":
        """Copy of the report with extra annotation lines attached."""
        return replace(self, notes=self.notes + notes)


def compare_columns(
    table: BenchTable,
    col1: tuple[str, str, str],
    col2: tuple[str, str, str],
) -> ComparisonReport:
    """Compare two encoder-aligned columns given as (task, metric, probe_set).

    diff_percent is positive when the second column is better: for
    lower_better metrics it is (mean1 − mean2) / mean1 · 100, for
    higher_better (mean2 − mean1) / mean1 · 100.  When the two columns
    disagree on direction, diff_percent is None.
    """
    values1, dir1 = table.column(*col1)
    values2, dir2 = table.column(*col2)
    only1 = sorted(set(values1) - set(values2))
    only2 = sorted(set(values2) - set(values1))
    if only1 or only2:
        raise TableError(
            f"encoder mismatch between columns: {only1} only in the first, "
            f"{only2} only in the second"
        )
    encoders = sorted(values1)
    vec1 = [values1[e] for e in encoders]
    vec2 = [values2[e] for e in encoders]
    mean1 = float(np.mean(vec1))
    mean2 = float(np.mean(vec2))
    if dir1 != dir2:
        diff: float | None = None
    elif dir1 == "lower_better":
        diff = (mean1 - mean2) / mean1 * 100.0
    else:
        diff = (mean2 - mean1) / mean1 * 100.0
    same_pair = (col1[0], col1[1]) == (col2[0], col2[1])
    label1 = col1[2] if same_pair else f"{col1[0]}:{col1[2]}"
    label2 = col2[2] if same_pair else f"{col2[0]}:{col2[2]}"
    return ComparisonReport(
        columns=(
            ReportColumn(*col1, direction=dir1, label=label1),
            ReportColumn(*col2, direction=dir2, label=label2),
        ),
        n=len(encoders),
        pearson=pearson(vec1, vec2),
        spearman=spearman(vec1, vec2),
        mean_1=mean1,
        mean_2=mean2,
        diff_percent=diff,
        rankings=(rank_models(table, *col1), rank_models(table, *col2)),
    )


def compare_probe_sets(
    table: BenchTable, task: str, metric: str, set1: str, set2: str
) -> ComparisonReport:
    """Compare two probe sets on the same (task, metric)."""
    return compare_columns(table, (task, metric, set1), (task, metric, set2))


def best_over_probes(
    table: BenchTable, task: str, metric: str, capacity_limit: float | None = None
) -> tuple[MetricValue, ...]:
    """Per-encoder best value over probe sets, optionally capacity-limited.

    A probe set participates only when its parameter count is known and
    ≤ capacity_limit (when a limit is given).  The returned rows carry the
    chosen probe_set; ties go to the lexicographically first set.

    Returns:
        One MetricValue per encoder, sorted by encoder name.
    """
    sets = table.probe_sets(task, metric)
    if not sets:
        raise TableError(f"no probe sets hold values for task '{task}' metric '{metric}'")
    if capacity_limit is not None:
        missing = [s for s in sets if (task, s) not in table.probe_params]
        if missing:
            raise TableError(
                f"capacity limit set but probe sets {missing} have no parameter "
                f"count for task '{task}'"
            )
        sets = [s for s in sets if table.probe_params[(task, s)] <= capacity_limit]
        if not sets:
            raise TableError(
                f"no probe set for task '{task}' fits capacity limit {capacity_limit}"
            )
    per_encoder: dict[str, MetricValue] = {}
    for probe_set in sets:
        values, direction = table.column(task, metric, probe_set)
        better = (lambda a, b: a < b) if direction == "lower_better" else (lambda a, b: a > b)
        for encoder, value in values.items():
            held = per_encoder.get(encoder)
            if held is None or better(value, held.value):
                per_encoder[encoder] = MetricValue(
                    encoder=encoder,
                    task=task,
                    probe_set=probe_set,
                    metric=metric,
                    value=value,
                    direction=direction,
                )
    return tuple(per_encoder[e] for e in sorted(per_encoder))


def _round_sig(x: float, digits: int) -> float:
    return float(f"{x:.{digits}g}")


def report_to_dict(report: ComparisonReport, digits: int = 6) -> dict:
    """JSON-ready dict with all numerics rounded to ``digits`` significant
    digits (the same rounding every output format applies)."""
    return {
        "columns": [
            {
                "task": c.task,
                "metric": c.metric,
                "probe_set": c.probe_set,
                "direction": c.direction,
                "label": c.label,
            }
            for c in report.columns
        ],
        "n": report.n,
        "pearson": _round_sig(report.pearson, digits),
        "spearman": _round_sig(report.spearman, digits),
        "mean_1": _round_sig(report.mean_1, digits),
        "mean_2": _round_sig(report.mean_2, digits),
        "diff_percent": None
        if report.diff_percent is None
        else _round_sig(report.diff_percent, digits),
        "rankings": {
            col.label: [
                {"encoder": e, "value": _round_sig(v, digits), "rank": r}
                for e, v, r in ranking
            ]
            for col, ranking in zip(report.columns, report.rankings)
        },
        "notes": list(report.notes),
    }


def _flatten(value, prefix: str, out: dict[str, object]) -> None:
    if isinstance(value, dict):
        for key in value:
            _flatten(value[key], f"{prefix}/{key}" if prefix else str(key), out)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(item, f"{prefix}/{i}" if prefix else str(i), out)
        if not value:
            out[prefix] = []
    else:
        out[prefix] = value


def _unflatten(flat: dict[str, object]):
    root: dict = {}
    for path, value in flat.items():
        parts = path.split("/")
        node = root
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value

    def materialize(node):
        if not isinstance(node, dict):
            return node
        keys = list(node)
        if keys and all(k.isdigit() for k in keys):
            return [materialize(node[k]) for k in sorted(keys, key=int)]
        return {k: materialize(node[k]) for k in keys}

    return materialize(root)


def emit_report(
    reports: Sequence[ComparisonReport], fmt: str, digits: int = 6
) -> str:
    """Render reports as deterministic json, csv, or markdown text.

    The csv form is a flat two-column (path, value) projection of the json
    form with JSON-encoded cells, so json → csv → json round trips preserve
    every field exactly.
    """
    dicts = [report_to_dict(r, digits) for r in reports]
    if fmt == "json":
        return json.dumps(dicts, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        flat: dict[str, object] = {}
        if dicts:
            _flatten(dicts, "", flat)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["path", "value"])
        for path in sorted(flat):
            writer.writerow([path, json.dumps(flat[path])])
        return buf.getvalue()
    if fmt == "markdown":
        lines = [
            "| Task | Metric | Set 1 | Set 2 | Pearson | Spearman | Mean 1 | Mean 2 | Diff% |",
            "| --- | --- | --- | --- | --- | --- | --- | --- | --- |",
        ]
        for d in dicts:
            c1, c2 = d["columns"]
            diff = "n/a" if d["diff_percent"] is None else f"{d['diff_percent']:+g}"
            task = c1["task"] if c1["task"] == c2["task"] else f"{c1['task']} vs {c2['task']}"
            lines.append(
                f"| {task} | {c1['metric']} | {c1['label']} | {c2['label']} "
                f"| {d['pearson']:g} | {d['spearman']:g} "
                f"| {d['mean_1']:g} | {d['mean_2']:g} | {diff} |"
            )
        for d in dicts:
            for label, ranking in sorted(d["rankings"].items()):
                ranked = ", ".join(
                    f"{row['encoder']} ({row['rank']:g})" for row in ranking
                )
                lines.append("")
                lines.append(f"Ranking {label}: {ranked}")
            for note in d["notes"]:
                lines.append("")
                lines.append(f"Note: {note}")
        return "\n".join(lines) + "\n"
    raise TableError(f"unknown report format '{fmt}' (choose json, csv, or markdown)")


def reports_from_emitted(text: str, fmt: str) -> list[dict]:
    """Parse emitted json or csv back into report dicts (round-trip check)."""
    if fmt == "json":
        return json.loads(text)
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header != ["path", "value"]:
            raise TableError("csv report must start with a 'path,value' header")
        flat = {path: json.loads(cell) for path, cell in reader}
        if not flat:
            return []
        result = _unflatten(flat)
        return result if isinstance(result, list) else [result]
    raise TableError(f"cannot parse report format '{fmt}'")
