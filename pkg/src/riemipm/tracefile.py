"""Trace and summary serialization shared by the CLI and the validation suite."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .diagnostics import convergence_order, theta_band
from .kkt import barrier_kkt
from .ripm import SolveReport

__all__ = ["trace_fields", "format_trace", "write_trace", "read_trace", "summarize"]

_BASE = ("k", "mu", "grad_norm", "compl_norm", "eq_norm", "min_g", "min_y", "inner_iters", "err_to_ref", "order")
_TRUST = ("delta", "nu", "lambda_min")


def trace_fields(algorithm: str) -> tuple[str, ...]:
    if algorithm == "riptrm":
        return _BASE + _TRUST
    if algorithm == "ripm":
        return _BASE
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return ""
    return "%.17g" % v


def format_trace(report: SolveReport, algorithm: str) -> str:
    """Comma-separated trace with one header row and one row per outer iteration.

    Floats use ``%.17g`` so the text round-trips exactly; undefined values
    (the order for the first two rows, for instance) are left empty.
    """
    fields = trace_fields(algorithm)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in report.trace:
        w.writerow([_cell(getattr(row, f)) for f in fields])
    return buf.getvalue()


def write_trace(path, report: SolveReport, algorithm: str) -> None:
    Path(path).write_text(format_trace(report, algorithm))


def read_trace(path) -> dict[str, np.ndarray]:
    """Columns of a trace file as float arrays; empty cells become NaN."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace file")
    header, body = rows[0], rows[1:]
    if tuple(header[: len(_BASE)]) != _BASE:
        raise ValueError(f"{path}: unexpected trace header {header}")
    cols = {}
    for j, name in enumerate(header):
        cols[name] = np.array([float(r[j]) if r[j] else math.nan for r in body])
    return cols


def rate_summary(errors, mus) -> dict:
    out: dict = {"fitted_order": None, "min_error_ratio": None, "theta_band": None}
    try:
        rr = convergence_order(errors)
        out["fitted_order"] = rr.order
        out["min_error_ratio"] = float(rr.ratios.min())
        out["orders"] = [float(p) for p in rr.orders]
    except ValueError as exc:
        out["rate_error"] = str(exc)
    if len(errors) >= 1:
        band = theta_band(errors, mus)
        out["theta_band"] = band if math.isfinite(band) else None
    return out


def summarize(problem, report: SolveReport, algorithm: str) -> dict:
    """Structured summary: status, final residuals, fitted order and the Theta-law band."""
    mu_last = report.trace[-1].mu if report.trace else None
    F = barrier_kkt(problem, report.point, 0.0)
    out = {
        "problem": problem.name,
        "algorithm": algorithm,
        "status": report.status,
        "outer_iterations": len(report.trace),
        "inner_iterations": [t.inner_iters for t in report.trace],
        "final_mu": mu_last,
        "final_kkt_residual": F.norm(),
        "final_grad_norm": F.grad_norm,
        "final_compl_norm": F.compl_norm,
        "final_eq_norm": F.eq_norm,
        "reference_mode": report.reference_mode,
        "events": list(report.events),
        "x": [float(v) for v in report.point.x],
        "y": [float(v) for v in report.point.y],
        "z": [float(v) for v in report.point.z],
    }
    if report.trace:
        out.update(rate_summary(report.errors, report.mus))
    return out
