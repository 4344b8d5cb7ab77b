"""CSV / JSON / SVG output for criterion series.

CSV: one header row, then one row per sample. Columns are ``time``, the
:class:`~eulerbkm.monitor.NormReport` norms, and for each enabled
criterion ``integrand_<name>`` and ``running_<name>`` (plus the
``tan2_h`` pair). Floats are written with 17 significant digits so a
read-back reproduces them exactly.

JSON summary keys: ``criteria`` (integral, error estimate and final
integrand per criterion), ``omitted_criteria``, ``gronwall``,
``gronwall_local`` (null without a triplet), ``growth`` (least-squares
exponent of ``||omega||_inf`` on the trailing half), ``samples``,
``t_start``, ``t_end`` and ``metadata``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, SeriesError
from .monitor import (
    CRITERIA,
    EXTRA_INTEGRANDS,
    NORM_COLUMNS,
    CriterionSeries,
    gronwall_audit,
    gronwall_audit_local,
    growth_exponent,
)

SCHEMA_VERSION = 1


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def integrand_names(series):
    return list(series.criteria) + list(EXTRA_INTEGRANDS)


def series_csv_text(series: CriterionSeries) -> str:
    names = integrand_names(series)
    header = list(NORM_COLUMNS) + [f"{p}_{n}" for n in names for p in ("integrand", "running")]
    cols = [series.column(c) for c in NORM_COLUMNS]
    for n in names:
        f = series.integrand(n)
        cols.append(f)
        cols.append(series.running(n) if len(series) >= 2 else np.zeros(len(f)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for i in range(len(series)):
        w.writerow([_fmt(c[i]) for c in cols])
    return buf.getvalue()


def write_csv(series, path):
    path = Path(path)
    try:
        path.write_text(series_csv_text(series))
    except OSError as exc:
        raise OSError(f"{path}: cannot write CSV ({exc.strerror})") from exc
    return path


def read_series_csv(path) -> CriterionSeries:
    """Rebuild a series from a CSV written by :func:`write_csv`.

    Raises
    ------
    SeriesError
        On a missing or foreign header, ragged or truncated rows, or
        unparsable numbers.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise SeriesError(f"{path}: cannot read ({exc})") from exc
    if not text.endswith("\n"):
        raise SeriesError(f"{path}: truncated (no final newline)")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SeriesError(f"{path}: empty file")
    header = rows[0]
    missing = [c for c in NORM_COLUMNS if c not in header]
    if missing:
        raise SeriesError(f"{path}: header lacks columns {missing}")
    criteria = tuple(c for c in CRITERIA if f"integrand_{c}" in header)
    series = CriterionSeries(criteria=criteria)
    idx = [header.index(c) for c in NORM_COLUMNS]
    for no, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SeriesError(f"{path}: row {no} has {len(row)} fields, expected {len(header)}")
        try:
            vals = [float(row[i]) for i in idx]
        except ValueError as exc:
            raise SeriesError(f"{path}: row {no}: {exc}") from None
        for c, v in zip(NORM_COLUMNS, vals):
            series.columns[c].append(v)
    if len(series) == 0:
        raise SeriesError(f"{path}: no data rows")
    t = series.times
    if np.any(np.diff(t) <= 0):
        raise SeriesError(f"{path}: times are not increasing")
    return series


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if not math.isfinite(x) else x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def summary(series: CriterionSeries) -> dict:
    if len(series) == 0:
        raise SeriesError("empty series")
    out = {"schema": SCHEMA_VERSION, "samples": len(series),
           "t_start": float(series.times[0]), "t_end": float(series.times[-1]),
           "metadata": dict(series.metadata),
           "omitted_criteria": [c for c in CRITERIA if c not in series.criteria]}
    crit = {}
    for name in integrand_names(series):
        f = series.integrand(name)
        entry = {"final_integrand": float(f[-1])}
        if len(series) >= 2:
            entry["integral"] = series.integral(name)
            entry["error_estimate"] = series.error_estimate(name)
        else:
            entry["integral"] = None
            entry["error_estimate"] = None
        crit[name] = entry
    out["criteria"] = crit
    if len(series) >= 2:
        try:
            out["gronwall"] = gronwall_audit(series).summary()
        except ConfigError:
            out["gronwall"] = None
        out["gronwall_local"] = gronwall_audit_local(series).summary() if series.has_triplet() else None
        out["growth"] = growth_exponent(series.times, series.column("linf_omega"))
    else:
        out["gronwall"] = out["gronwall_local"] = out["growth"] = None
    return _clean(out)


def summary_json_text(series) -> str:
    return json.dumps(summary(series), indent=2, sort_keys=True) + "\n"


def write_summary_json(series, path):
    path = Path(path)
    path.write_text(summary_json_text(series))
    return path


def summary_text(series) -> str:
    """Human-readable summary."""
    s = summary(series)
    lines = [f"samples: {s['samples']}  window: [{s['t_start']:.6g}, {s['t_end']:.6g}]"]
    for name, e in s["criteria"].items():
        if e["integral"] is None:
            lines.append(f"{name:10s} integral: n/a (single sample)")
        else:
            lines.append(f"{name:10s} integral: {e['integral']:.10g}  "
                         f"(error estimate {e['error_estimate']:.3g})")
    if s["omitted_criteria"]:
        lines.append("omitted criteria: " + ", ".join(s["omitted_criteria"]))
    for key in ("gronwall", "gronwall_local"):
        g = s.get(key)
        if g:
            lines.append(f"{key}: min margin {g['min_margin']:.6g} "
                         f"(tolerance {g['tolerance']:.3g}) {'pass' if g['passed'] else 'FAIL'}")
    if s.get("growth"):
        ex = s["growth"]["exponent"]
        lines.append(f"growth exponent of ||omega||_inf (trailing half): "
                     f"{'n/a' if ex is None else format(ex, '.6g')}")
    return "\n".join(lines) + "\n"


def write_plots(series, directory):
    """One SVG per enabled integrand: the integrand and its running integral."""
    import matplotlib
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    from matplotlib.figure import Figure

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    t = series.times
    with matplotlib.rc_context({"svg.hashsalt": "eulerbkm", "svg.fonttype": "path"}):
        for name in integrand_names(series):
            fig = Figure(figsize=(6.0, 4.5))
            FigureCanvasSVG(fig)
            ax1, ax2 = fig.subplots(2, 1, sharex=True)
            ax1.plot(t, series.integrand(name), lw=1.2)
            ax1.set_ylabel("integrand")
            ax1.set_title(name)
            run = series.running(name) if len(series) >= 2 else np.zeros(len(t))
            ax2.plot(t, run, lw=1.2, color="C1")
            ax2.set_ylabel("running integral")
            ax2.set_xlabel("t")
            fig.tight_layout()
            p = directory / f"{name}.svg"
            fig.savefig(p, format="svg", metadata={"Date": None})
            paths.append(p)
    return paths
