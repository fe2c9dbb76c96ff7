"""Report serialization: long-form CSV, summary CSV, JSON and markdown tables."""

import csv
import io
import json

from .harness import CellResult, Report

__all__ = ["emit_report", "emit_summary_csv", "report_from_json", "FORMATS"]

FORMATS = ("csv", "json", "markdown")
CSV_COLUMNS = ("dataset", "sampler", "classifier", "metric", "rep_index", "value")
SUMMARY_COLUMNS = ("dataset", "sampler", "classifier", "metric", "mean", "best", "status")
METRIC_LABELS = {"gmean": "G", "f1": "F1", "auc": "AUC"}


def _fmt(value):
    return "na" if value is None else repr(value)


def _csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    metrics = report.config["metrics"] if report.cells else []
    for cell in report.cells:
        for m in metrics:
            for rep, v in enumerate(cell.values[m]):
                w.writerow((cell.dataset, cell.sampler, cell.classifier, m, rep, _fmt(v)))
    return buf.getvalue()


def emit_summary_csv(report):
    """One row per (cell, metric) with the replication mean and best flag."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for cell in report.cells:
        for m in report.config["metrics"]:
            winners = report.best.get(f"{cell.dataset}|{cell.classifier}|{m}", [])
            w.writerow((cell.dataset, cell.sampler, cell.classifier, m,
                        _fmt(cell.means[m]), int(cell.sampler in winners),
                        "failed" if cell.failed else "ok"))
    return buf.getvalue().encode("utf-8")


def _as_dict(report):
    return {
        "config": report.config,
        "cells": [
            {
                "dataset": c.dataset,
                "sampler": c.sampler,
                "classifier": c.classifier,
                "values": c.values,
                "means": c.means,
                "errors": c.errors,
            }
            for c in report.cells
        ],
        "best": report.best,
    }


def _json(report):
    return json.dumps(_as_dict(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def report_from_json(data):
    """Inverse of ``emit_report(report, "json")``."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    obj = json.loads(data)
    cells = [CellResult(c["dataset"], c["sampler"], c["classifier"], c["values"],
                        c["means"], c["errors"]) for c in obj["cells"]]
    return Report(config=obj["config"], cells=cells, best=obj["best"])


def _markdown(report):
    """One table per classifier: rows dataset x metric, columns samplers.

    The best mean in each row is bold; failed cells show ``na``.
    """
    cfg = report.config
    samplers = cfg["samplers"]
    lines = []
    for clf in cfg["classifiers"]:
        if lines:
            lines.append("")
        lines.append(f"### {clf}")
        lines.append("")
        lines.append("| | " + " | ".join(samplers) + " |")
        lines.append("|---|" + "---:|" * len(samplers))
        for ds in cfg["datasets"]:
            name = ds["name"]
            for m in cfg["metrics"]:
                winners = report.best.get(f"{name}|{clf}|{m}", [])
                row = []
                for s in samplers:
                    try:
                        v = report.mean(name, s, clf, m)
                    except KeyError:
                        v = None
                    text = "na" if v is None else f"{v:.3f}"
                    row.append(f"**{text}**" if s in winners and v is not None else text)
                lines.append(f"| {name} {METRIC_LABELS[m]} | " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def emit_report(report, fmt="json"):
    """Serialize ``report`` to bytes in ``fmt`` (csv, json or markdown)."""
    if fmt == "csv":
        text = _csv(report)
    elif fmt == "json":
        text = _json(report)
    elif fmt in ("markdown", "md"):
        text = _markdown(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}; choose from {FORMATS}")
    return text.encode("utf-8")
