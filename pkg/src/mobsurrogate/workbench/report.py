"""Aggregation of run records into per-step mean tables and CSV exports."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from ..exceptions import MixedProblems
from .problems import PARAM_UNITS, QOI_UNITS, get_problem
from .study import RunRecord

__all__ = ["aggregate", "write_metrics_csv", "write_trace_csv", "METRIC_UNITS"]

METRIC_UNITS = {
    "mae": "QoI", "rmse": "QoI", "rmae": "1", "r2": "1", "a_pos": "%", "a_neg": "%",
}


def aggregate(records: list[RunRecord]) -> list[dict]:
    """Per-step arithmetic mean of every metric across successful records.

    Undefined values (a class absent from the reference) are left out of
    the mean; a step where every value is undefined reports ``nan``.
    Rows carry ``step``, ``n_samples``, ``n_runs`` and one key per metric.
    """
    if not records:
        raise ValueError("no records to aggregate")
    if len({(r.problem, r.scheme) for r in records}) > 1:
        raise MixedProblems("records mix problems or schemes")
    ok = [r for r in records if r.status == "ok"]
    if not ok:
        raise ValueError("every record failed")
    n_steps = min(len(r.steps) for r in ok)
    names = sorted({k for r in ok for s in r.steps for k in s.metrics})
    rows = []
    for i in range(n_steps):
        row = {"step": ok[0].steps[i].step, "n_samples": ok[0].steps[i].n_samples,
               "n_runs": len(ok)}
        for name in names:
            vals = [r.steps[i].metrics.get(name, math.nan) for r in ok]
            vals = [v for v in vals if v is not None and not math.isnan(v)]
            row[name] = float(np.mean(vals)) if vals else math.nan
        rows.append(row)
    return rows


def _header(rows: list[dict], units: dict) -> list[str]:
    return [f"{k} [{units.get(k, '1')}]" for k in rows[0]]


def write_metrics_csv(records: list[RunRecord], path=None, qoi_unit: str = "QoI") -> str:
    """Per-step mean metrics as CSV; returns the text and writes ``path`` if given."""
    rows = aggregate(records)
    units = {k: (qoi_unit if v == "QoI" else v) for k, v in METRIC_UNITS.items()}
    units.update(step="1", n_samples="1", n_runs="1")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_header(rows, units))
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row.values()])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def write_trace_csv(records: list[RunRecord], path=None) -> str:
    """Sample positions in physical units, one row per sample per run."""
    if len({r.problem for r in records}) > 1:
        raise MixedProblems("records mix problems")
    spec = get_problem(records[0].problem)
    dom = spec.domain
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed [1]", "order [1]", "initial [1]"]
               + [f"{n} [{PARAM_UNITS[n]}]" for n in spec.names]
               + [f"value [{QOI_UNITS[spec.qoi]}]"])
    for r in records:
        phys = dom.lower + r.X * (dom.upper - dom.lower)
        for k in range(len(r.y)):
            w.writerow([r.seed, k, int(k < r.n_init)] + [repr(float(v)) for v in phys[k]]
                       + [repr(float(r.y[k]))])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
