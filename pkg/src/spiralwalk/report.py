"""Report assembly and emission.

A Report is the complete, deterministic record of one experiment run:
config echo, per-replicate statistic columns (optionally elided for very
large runs), moment aggregates, verdicts, histogram and QQ plot data, seed
provenance and wall clock.  Rendering is available as CSV (one row per
replicate plus a single aggregates footer row; verdicts and extras ride in
comment lines) and JSON (one document with every field).  All floats are
serialized with repr, which is round-trip exact; tests parse emitted
documents back and compare numbers with ==.

Everything except wall_clock_seconds is a pure function of the experiment
config; render_csv/render_json take include_wall_clock=False so byte
identity can be asserted across thread counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .stats import LimitLaw, normal_quantile, poisson_diff_pmf


class ReportError(ValueError):
    """Emission failures, with path context where applicable."""


@dataclass
class Report:
    experiment: str
    config: dict
    regime: str
    regime_condition: str
    columns: tuple
    rows: dict | None  # column name -> np.ndarray; None when elided
    rows_elided: bool
    replicates: int
    aggregates: dict  # column name -> MomentSummary
    verdicts: list  # (name, TestVerdict) pairs
    histogram: dict | None
    qq: dict | None
    extras: dict = field(default_factory=dict)
    seed_provenance: str = ""
    wall_clock_seconds: float = 0.0

    def all_verdicts_pass(self) -> bool:
        return all(v.passed for _, v in self.verdicts)


# ------------------------------------------------------------------ plotting


def build_histogram(values, column: str) -> dict:
    """Freedman-Diaconis bin edges with a floor of 20 bins, recorded with
    counts so plots are reproducible from the report alone."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if lo == hi:
        edges = np.linspace(lo - 0.5, hi + 0.5, 21)
    else:
        q75, q25 = np.percentile(v, [75.0, 25.0])
        width = 2.0 * (q75 - q25) / v.size ** (1.0 / 3.0)
        bins = 20 if width <= 0.0 else max(20, int(math.ceil((hi - lo) / width)))
        edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(v, bins=edges)
    return {
        "column": column,
        "edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
    }


def build_qq(values, column: str, law: LimitLaw | None, reference=None) -> dict | None:
    """Empirical vs reference quantiles at the 99 interior percentiles.

    The reference side comes from a sorted reference sample when one exists
    (stable limits, the conjecture convolution), else from the limit law
    (normal quantiles, or the integer inverse CDF for the Poisson-difference
    law).  None when there is no reference to compare against."""
    v = np.asarray(values, dtype=np.float64)
    probs = np.arange(1, 100) / 100.0
    empirical = np.quantile(v, probs)
    if reference is not None:
        theoretical = np.quantile(np.asarray(reference, dtype=np.float64), probs)
    elif law is None:
        return None
    elif law.kind == "normal":
        scale = math.sqrt(law.variance)
        theoretical = np.array([scale * normal_quantile(p) for p in probs])
    elif law.kind == "poisson_diff":
        pmf = poisson_diff_pmf(law.c, support_bound=30)
        keys = sorted(pmf)
        cdf = np.cumsum([pmf[k] for k in keys])
        idx = np.searchsorted(cdf, probs, side="left")
        theoretical = np.array([float(keys[min(i, len(keys) - 1)]) for i in idx])
    else:
        return None
    return {
        "column": column,
        "probabilities": [float(p) for p in probs],
        "theoretical": [float(t) for t in theoretical],
        "empirical": [float(e) for e in empirical],
    }


# ----------------------------------------------------------------- rendering


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


_AGG_FIELDS = (
    "sample_size",
    "mean",
    "variance",
    "skewness",
    "kurtosis",
    "se_mean",
    "se_variance",
    "se_skewness",
    "se_kurtosis",
)


def render_csv(report: Report, include_wall_clock: bool = True) -> str:
    """Header + one row per replicate + one aggregates footer row.  Comment
    lines (leading '#') carry the config echo, verdicts, extras and wall
    clock; strip them for byte comparisons or machine reading."""
    lines = [f"# experiment: {report.experiment}"]
    lines.append(f"# regime: {report.regime} ({report.regime_condition})")
    cfg = ";".join(f"{k}={v}" for k, v in report.config.items())
    lines.append(f"# config: {cfg}")
    lines.append(f"# seed_provenance: {report.seed_provenance}")
    for name, v in report.verdicts:
        lines.append(
            f"# verdict: {name} statistic={_fmt(v.statistic)} "
            f"threshold={_fmt(v.threshold)} passed={v.passed} "
            f"sample_size={v.sample_size}"
        )
    for key in sorted(report.extras):
        lines.append(f"# extra: {key}={_fmt_extra(report.extras[key])}")
    if report.rows_elided:
        lines.append(f"# rows elided: {report.replicates} replicates, aggregates only")
    lines.append(",".join(("replicate",) + tuple(report.columns)))
    if report.rows is not None and report.columns:
        cols = [report.rows[c] for c in report.columns]
        for i in range(report.replicates):
            lines.append(",".join([str(i)] + [_fmt(col[i]) for col in cols]))
    cells = ["aggregates"]
    for name in report.columns:
        summary = report.aggregates.get(name)
        if summary is None:
            continue
        for f in _AGG_FIELDS:
            cells.append(f"{name}.{f}={_fmt(getattr(summary, f))}")
    lines.append(",".join(cells))
    if include_wall_clock:
        lines.append(f"# wall_clock_seconds: {_fmt(report.wall_clock_seconds)}")
    return "\n".join(lines) + "\n"


def _fmt_extra(value) -> str:
    if isinstance(value, str):
        return value
    return _fmt(value)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def render_json(report: Report, include_wall_clock: bool = True) -> str:
    doc = {
        "experiment": report.experiment,
        "config": _jsonify(report.config),
        "regime": report.regime,
        "regime_condition": report.regime_condition,
        "columns": list(report.columns),
        "replicates": report.replicates,
        "rows_elided": report.rows_elided,
        "rows": None if report.rows is None else _jsonify(report.rows),
        "aggregates": {
            name: {f: _jsonify(getattr(s, f)) for f in _AGG_FIELDS}
            for name, s in report.aggregates.items()
        },
        "verdicts": [
            {
                "name": name,
                "statistic": float(v.statistic),
                "threshold": float(v.threshold),
                "passed": bool(v.passed),
                "sample_size": int(v.sample_size),
            }
            for name, v in report.verdicts
        ],
        "histogram": _jsonify(report.histogram) if report.histogram else None,
        "qq": _jsonify(report.qq) if report.qq else None,
        "extras": _jsonify(report.extras),
        "seed_provenance": report.seed_provenance,
    }
    if include_wall_clock:
        doc["wall_clock_seconds"] = float(report.wall_clock_seconds)
    return json.dumps(doc, indent=1) + "\n"


def parse_report_json(text: str) -> dict:
    return json.loads(text)


def emit_report(report: Report, fmt: str, path) -> str:
    """Write the report to path in the named format; returns the path."""
    if fmt not in ("csv", "json"):
        raise ReportError(f"format must be csv or json, got {fmt!r}")
    text = render_csv(report) if fmt == "csv" else render_json(report)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {path}: {exc}") from exc
    return str(path)
