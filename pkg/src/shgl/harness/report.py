"""Persistence of sweep reports and tables: CSV, JSON lines and SVG plots."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .sweep import ScalingReport

__all__ = ["emit_report", "read_csv", "write_csv", "write_jsonl", "read_jsonl", "write_svg"]

STAT_FIELDS = ["eps", "n", "median", "q90", "mean", "stderr"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if isinstance(v, (list, tuple)):
        return json.dumps(list(v))
    return str(v)


def write_csv(path, rows: list[dict], fields: list[str] | None = None,
              meta: dict | None = None) -> Path:
    """Write ``rows`` with 17 significant digits; ``meta`` becomes a trailing ``#fit`` row."""
    path = Path(path)
    fields = fields or (list(rows[0].keys()) if rows else [])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r.get(f, "")) for f in fields])
        if meta:
            w.writerow(["#fit"] + [f"{k}={_fmt(v)}" for k, v in meta.items()])
    return path


def _parse(s: str):
    if s in ("True", "False"):
        return s == "True"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[list[dict], dict]:
    """Inverse of :func:`write_csv`: ``(rows, fit metadata)``."""
    rows, meta = [], {}
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, [])
        for line in reader:
            if line and line[0] == "#fit":
                for item in line[1:]:
                    k, _, v = item.partition("=")
                    meta[k] = _parse(v)
            else:
                rows.append({h: _parse(v) for h, v in zip(header, line)})
    return rows, meta


def write_jsonl(path, records: list[dict]) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def read_jsonl(path) -> list[dict]:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_svg(path, report: ScalingReport) -> Path:
    """Log-log plot of median and q90 with the q90 fit and the pass-band slopes."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    if report.eps:
        eps = np.asarray(report.eps, dtype=float)
        q90 = np.array([s["q90"] for s in report.stats])
        med = np.array([s["median"] for s in report.stats])
        ax.loglog(eps, q90, "o", label="q90")
        ax.loglog(eps, med, "s", mfc="none", label="median")
        if math.isfinite(report.slope_q90):
            ee = np.geomspace(eps.min(), eps.max(), 50)
            ax.loglog(ee, np.exp(report.intercept_q90) * ee ** report.slope_q90, "-",
                      label=f"fit slope {report.slope_q90:.3f}")
            # pass band anchored at the geometric centre of the q90 fit
            e0 = math.sqrt(eps.min() * eps.max())
            y0 = math.exp(report.intercept_q90) * e0 ** report.slope_q90
            lo, hi = report.pass_band
            ax.fill_between(ee, y0 * (ee / e0) ** hi, y0 * (ee / e0) ** lo, color="0.85",
                            label=f"band [{lo}, {hi}]")
    ax.set_xlabel("eps")
    ax.set_ylabel(report.key)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def emit_report(report: ScalingReport, fmt: str, out_dir, stem: str | None = None) -> list[Path]:
    """Write ``report`` as ``csv`` (per-eps stats + fit row), ``jsonl`` (records) or ``svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or report.quantity
    if fmt == "csv":
        return [write_csv(out / f"{stem}.csv", report.rows(), STAT_FIELDS,
                          report.fit_meta() if report.eps else None)]
    if fmt == "jsonl":
        return [write_jsonl(out / f"{stem}.jsonl", report.records)]
    if fmt in ("svg", "svg-plot"):
        return [write_svg(out / f"{stem}.svg", report)]
    raise ValueError(f"unknown format {fmt!r}")
