"""Command-line entry point binding all toolkit modules.

Subcommands:

* ``mine``     mine ABX triplets from an archive manifest
* ``abx``      ABX error over an archive and a triplet file
* ``ax``       AX verification EER over an archive and a trial file
* ``probe``    train/evaluate the pooled linear probe
* ``macs``     MAC accounting for declared architecture specs
* ``analyze``  benchmark-table correlations, rankings, and best-over-probes

Exit codes: 0 success, 1 usage error, 2 data/validation error.  Results go
to stdout or ``--out`` in json, csv, or markdown (``--format``); numbers
are rounded to ``--digits`` significant digits (default 6).  Identical
arguments and input files produce byte-identical outputs; the seed is
always echoed in the result.  The ``MP3S_EVAL_LOG`` environment variable
sets the log level (stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels, bench
from .costmodel import load_archspec, pipeline_macs, probe_macs
from .errors import DataError, TableError
from .headless.abx import abx_error
from .headless.mining import MiningConfig, mine_triplets, read_triplets, write_triplets
from .headless.verification import compute_eer, read_trials, score_trials
from .layers import decay_weights, load_weights, save_weights
from .probe import ProbeConfig, evaluate_probe, save_probe, train_probe
from .store import load_archive, load_manifest

log = logging.getLogger("mp3s_eval")


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message: str):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _round_floats(value, digits: int):
    """Round every float in a JSON-ready structure to significant digits."""
    if isinstance(value, float):
        return float(f"{value:.{digits}g}")
    if isinstance(value, dict):
        return {k: _round_floats(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v, digits) for v in value]
    return value


def _emit_payload(payload, fmt: str, digits: int) -> str:
    """Render a JSON-ready payload as json, csv (path,value), or markdown."""
    payload = _round_floats(payload, digits)
    if fmt == "json":
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"
    flat: dict[str, object] = {}
    bench._flatten(payload, "", flat)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["path", "value"])
        for path in sorted(flat):
            writer.writerow([path, json.dumps(flat[path])])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| field | value |", "| --- | --- |"]
        for path in sorted(flat):
            lines.append(f"| {path} | {json.dumps(flat[path])} |")
        return "\n".join(lines) + "\n"
    raise TableError(f"unknown format '{fmt}'")


def _metric_result(metric: str, value, n: int, config: dict, seed: int) -> dict:
    return {"metric": metric, "value": value, "n": n, "config": config, "seed": seed}


def _resolve_weights(args, num_layers: int, *, default_decay: float | None):
    """Weight precedence: --weights file, then --decay, then the default
    (decay at ``default_decay``, or uniform when that is None)."""
    if getattr(args, "weights", None):
        return load_weights(args.weights, num_layers), f"file:{args.weights}"
    if getattr(args, "decay", None) is not None:
        return decay_weights(num_layers, args.decay), f"decay:{args.decay}"
    if default_decay is not None:
        return decay_weights(num_layers, default_decay), f"decay:{default_decay}"
    return np.full(num_layers, 1.0 / num_layers), "uniform"


def _cmd_mine(args) -> dict:
    manifest = load_manifest(args.archive)
    config = MiningConfig(per_label_cap=args.cap, within_speaker=args.within_speaker)
    triplets = mine_triplets(manifest, config, args.seed)
    write_triplets(triplets, args.triplets_out)
    return _metric_result(
        "triplets_mined",
        len(triplets),
        len(triplets),
        {
            "archive": str(args.archive),
            "per_label_cap": args.cap,
            "within_speaker": args.within_speaker,
            "triplets_out": str(args.triplets_out),
        },
        args.seed,
    )


def _cmd_abx(args) -> dict:
    archive = load_archive(args.archive)
    triplets = read_triplets(args.triplets, seed=args.seed)
    weights, weighting = _resolve_weights(args, archive.num_layers, default_decay=None)
    error = abx_error(
        archive, triplets, weights, workers=args.workers, backend=args.backend
    )
    return _metric_result(
        "abx_error",
        error,
        len(triplets),
        {
            "archive": str(args.archive),
            "triplets": str(args.triplets),
            "weighting": weighting,
            "workers": args.workers,
            "backend": args.backend or _kernels.BACKEND,
        },
        args.seed,
    )


def _cmd_ax(args) -> dict:
    archive = load_archive(args.archive)
    trials = read_trials(args.trials)
    weights, weighting = _resolve_weights(args, archive.num_layers, default_decay=0.2)
    scored = score_trials(
        archive, trials, weights, workers=args.workers, backend=args.backend
    )
    eer, tau = compute_eer(scored)
    return _metric_result(
        "eer",
        eer,
        len(trials),
        {
            "archive": str(args.archive),
            "trials": str(args.trials),
            "weighting": weighting,
            "tau": tau,
            "workers": args.workers,
            "backend": args.backend or _kernels.BACKEND,
        },
        args.seed,
    )


def _cmd_probe(args) -> dict:
    train = load_archive(args.train)
    valid = load_archive(args.valid)
    frozen = None
    if args.frozen_weights:
        frozen = tuple(load_weights(args.frozen_weights, train.num_layers).tolist())
    cfg = ProbeConfig(
        learning_rate=args.lr,
        max_epochs=args.epochs,
        early_stop_patience=args.patience,
        seed=args.seed,
        frozen_weights=frozen,
    )
    probe = train_probe(train, valid, cfg)
    if args.save_probe:
        save_probe(probe, args.save_probe)
    if args.export_weights:
        save_weights(probe.layer_weights, args.export_weights)
    config = {
        "train": str(args.train),
        "valid": str(args.valid),
        "learning_rate": args.lr,
        "max_epochs": args.epochs,
        "early_stop_patience": args.patience,
        "frozen_weights": args.frozen_weights or None,
        "classes": probe.classes,
        "best_epoch": probe.history["best_epoch"],
        "layer_weights": probe.layer_weights.tolist(),
    }
    if args.test:
        test = load_archive(args.test)
        accuracy = evaluate_probe(probe, test)
        config["test"] = str(args.test)
        return _metric_result("accuracy", accuracy, len(test.records), config, args.seed)
    return _metric_result(
        "val_loss", probe.history["best_val_loss"], len(valid.records), config, args.seed
    )


def _cmd_macs(args) -> dict:
    spec = load_archspec(args.spec)
    if args.encoder:
        report = pipeline_macs(load_archspec(args.encoder), spec, args.frames)
        names = {"encoder": load_archspec(args.encoder).name, "probe": spec.name}
    else:
        report = probe_macs(spec, args.frames)
        names = {"probe": spec.name}
    config = {
        "names": names,
        "frames": report.frames,
        "per_layer": [{"layer": name, "macs": macs} for name, macs in report.per_layer],
        "subtotals": {name: macs for name, macs in report.subtotals},
        "gmacs": report.total_macs / 1e9,
    }
    return _metric_result("total_macs", report.total_macs, report.frames, config, args.seed)


def _parse_capacity(text: str) -> float:
    """Parse a parameter count, allowing K/M/G suffixes (e.g. '7.5M')."""
    scale = {"K": 1e3, "M": 1e6, "G": 1e9}.get(text[-1:].upper())
    try:
        return float(text[:-1]) * scale if scale else float(text)
    except ValueError as exc:
        raise TableError(f"bad capacity value '{text}'") from exc


def _default_metric(table: bench.BenchTable, task: str) -> str:
    """Default to the plainest column of a multi-metric task.

    The shortest (then alphabetically first) metric name is the base
    variant — e.g. 'wer' over 'wer_lm', 'wer_clean' over 'wer_clean_lm' or
    'wer_other'.  Any column stays selectable with --metric.
    """
    metrics = table.metrics(task)
    if not metrics:
        raise TableError(f"no rows for task '{task}'")
    return min(metrics, key=lambda m: (len(m), m))


def _cmd_analyze(args) -> str:
    table = bench.table_from_csv(args.table)
    metric = args.metric or _default_metric(table, args.task)
    if args.best:
        capacity = _parse_capacity(args.capacity) if args.capacity else None
        rows = bench.best_over_probes(table, args.task, metric, capacity)
        payload = {
            "task": args.task,
            "metric": metric,
            "capacity_limit": capacity,
            "seed": args.seed,
            "best": [
                {"encoder": r.encoder, "value": r.value, "probe_set": r.probe_set}
                for r in rows
            ],
        }
        return _emit_payload(payload, args.format, args.digits)
    if not (args.set1 and args.set2):
        raise TableError("comparison needs --set1 and --set2 (or use --best)")
    task2 = args.task2 or args.task
    metric2 = args.metric2 or (args.metric or _default_metric(table, task2))
    report = bench.compare_columns(
        table, (args.task, metric, args.set1), (task2, metric2, args.set2)
    )
    report = report.with_notes(f"seed={args.seed}")
    return bench.emit_report([report], args.format, args.digits)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mp3s-eval", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=42, help="run seed, echoed in output")
        p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
        p.add_argument("--out", type=Path, default=None, help="write result here instead of stdout")
        p.add_argument("--digits", type=int, default=6, help="significant digits in output")

    p_mine = sub.add_parser("mine", help="mine ABX triplets from labeled segments")
    p_mine.add_argument("--archive", required=True, type=Path)
    p_mine.add_argument("--triplets-out", required=True, type=Path)
    p_mine.add_argument("--cap", type=int, default=None, help="per label-pair triplet cap")
    p_mine.add_argument("--within-speaker", action="store_true")
    common(p_mine)
    p_mine.set_defaults(func=_cmd_mine)

    p_abx = sub.add_parser("abx", help="ABX error over mined triplets")
    p_abx.add_argument("--archive", required=True, type=Path)
    p_abx.add_argument("--triplets", required=True, type=Path)
    p_abx.add_argument("--weights", type=Path, help="layer-weight JSON file")
    p_abx.add_argument("--decay", type=float, default=None, help="depth-decay rate")
    p_abx.add_argument("--workers", type=int, default=1)
    p_abx.add_argument("--backend", choices=("auto", "compiled", "pure"), default=None)
    common(p_abx)
    p_abx.set_defaults(func=_cmd_abx)

    p_ax = sub.add_parser("ax", help="AX verification EER over trials")
    p_ax.add_argument("--archive", required=True, type=Path)
    p_ax.add_argument("--trials", required=True, type=Path)
    p_ax.add_argument("--weights", type=Path, help="layer-weight JSON file")
    p_ax.add_argument("--decay", type=float, default=None, help="depth-decay rate (default 0.2)")
    p_ax.add_argument("--workers", type=int, default=1)
    p_ax.add_argument("--backend", choices=("auto", "compiled", "pure"), default=None)
    common(p_ax)
    p_ax.set_defaults(func=_cmd_ax)

    p_probe = sub.add_parser("probe", help="train/evaluate the pooled linear probe")
    p_probe.add_argument("--train", required=True, type=Path)
    p_probe.add_argument("--valid", required=True, type=Path)
    p_probe.add_argument("--test", type=Path, default=None)
    p_probe.add_argument("--lr", type=float, default=0.5)
    p_probe.add_argument("--epochs", type=int, default=200)
    p_probe.add_argument("--patience", type=int, default=0)
    p_probe.add_argument("--frozen-weights", type=Path, default=None)
    p_probe.add_argument("--save-probe", type=Path, default=None)
    p_probe.add_argument("--export-weights", type=Path, default=None)
    common(p_probe)
    p_probe.set_defaults(func=_cmd_probe)

    p_macs = sub.add_parser("macs", help="MAC accounting for architecture specs")
    p_macs.add_argument("--spec", required=True, type=Path, help="probe spec JSON")
    p_macs.add_argument("--encoder", type=Path, default=None, help="optional encoder spec JSON")
    p_macs.add_argument("--frames", type=int, default=100)
    common(p_macs)
    p_macs.set_defaults(func=_cmd_macs)

    p_an = sub.add_parser("analyze", help="benchmark-table analysis")
    p_an.add_argument("--table", required=True, type=Path)
    p_an.add_argument("--task", required=True)
    p_an.add_argument("--metric", default=None)
    p_an.add_argument("--set1", default=None)
    p_an.add_argument("--set2", default=None)
    p_an.add_argument("--task2", default=None, help="second column task (cross-task compare)")
    p_an.add_argument("--metric2", default=None, help="second column metric")
    p_an.add_argument("--best", action="store_true", help="best value over probe sets")
    p_an.add_argument("--capacity", default=None, help="parameter budget, e.g. 7.5M")
    common(p_an)
    p_an.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("MP3S_EVAL_LOG", "INFO").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    shown = {k: v for k, v in vars(args).items() if k != "func" and v is not None}
    log.info("resolved config: %s", json.dumps(shown, sort_keys=True, default=str))
    try:
        result = args.func(args)
        text = result if isinstance(result, str) else _emit_payload(
            result, args.format, args.digits
        )
    except DataError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
