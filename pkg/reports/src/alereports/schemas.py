"""CSV schema validation for the three documented input kinds.

Trace CSV:   optional `# config_hash=<hex>` comment, header `re,im`,
             float rows (one boundary point each).
Report CSV:  optional `# config_hash=<hex>` comment, header
             `k,mean_re,mean_im,variance,se_var,se_mean,excess_kurtosis,
             oracle_var,z_var,verdict`, verdict in {pass, fail},
             oracle_var/z_var may be empty.
Sweep CSV:   `# slope[<metric>]=<float>` comments, header
             `c,sigma,metric,median,p90,n_replicas`.

Every reader raises SchemaError naming the offending column or line, so
the CLI can exit nonzero with a usable diagnostic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np


class SchemaError(Exception):
    """Input file does not match its documented schema."""


REPORT_COLUMNS = ("k", "mean_re", "mean_im", "variance", "se_var", "se_mean",
                  "excess_kurtosis", "oracle_var", "z_var", "verdict")
SWEEP_COLUMNS = ("c", "sigma", "metric", "median", "p90", "n_replicas")
TRACE_COLUMNS = ("re", "im")


def _split_comments(path):
    comments, body = [], []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif line:
                body.append(line)
    return comments, body


def _config_hash(comments) -> str:
    for c in comments:
        if c.startswith("config_hash="):
            return c.split("=", 1)[1]
    return ""


def _check_header(path, got, want):
    if tuple(got) != want:
        missing = sorted(set(want) - set(got))
        extra = sorted(set(got) - set(want))
        raise SchemaError(
            f"{path}: bad header; missing columns {missing}, "
            f"unexpected columns {extra} (want exactly {','.join(want)})")


def _float_cell(path, row_no, name, value):
    try:
        return float(value)
    except ValueError:
        raise SchemaError(f"{path}: row {row_no}, column {name!r}: "
                          f"{value!r} is not a number") from None


@dataclass(frozen=True)
class Trace:
    points: np.ndarray          # complex boundary polyline
    config_hash: str


def read_trace(path) -> Trace:
    comments, body = _split_comments(path)
    if not body:
        raise SchemaError(f"{path}: empty trace file")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    _check_header(path, rows[0], TRACE_COLUMNS)
    if len(rows) < 2:
        raise SchemaError(f"{path}: trace has a header but no points")
    pts = np.empty(len(rows) - 1, dtype=complex)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise SchemaError(f"{path}: row {i}: expected 2 cells, "
                              f"got {len(row)}")
        pts[i - 2] = complex(_float_cell(path, i, "re", row[0]),
                             _float_cell(path, i, "im", row[1]))
    return Trace(points=pts, config_hash=_config_hash(comments))


@dataclass(frozen=True)
class Report:
    k: np.ndarray
    variance: np.ndarray
    se_var: np.ndarray
    oracle_var: np.ndarray      # NaN where absent
    verdict: list
    config_hash: str


def read_report(path) -> Report:
    comments, body = _split_comments(path)
    if not body:
        raise SchemaError(f"{path}: empty report file")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    _check_header(path, rows[0], REPORT_COLUMNS)
    if len(rows) < 2:
        raise SchemaError(f"{path}: report has a header but no modes")
    n = len(rows) - 1
    k = np.empty(n, dtype=int)
    variance, se_var, oracle = (np.empty(n) for _ in range(3))
    verdict = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(REPORT_COLUMNS):
            raise SchemaError(f"{path}: row {i}: expected "
                              f"{len(REPORT_COLUMNS)} cells, got {len(row)}")
        rec = dict(zip(REPORT_COLUMNS, row))
        k[i - 2] = int(_float_cell(path, i, "k", rec["k"]))
        variance[i - 2] = _float_cell(path, i, "variance", rec["variance"])
        se_var[i - 2] = _float_cell(path, i, "se_var", rec["se_var"])
        oracle[i - 2] = (_float_cell(path, i, "oracle_var", rec["oracle_var"])
                         if rec["oracle_var"] else np.nan)
        if rec["verdict"] not in ("pass", "fail"):
            raise SchemaError(f"{path}: row {i}, column 'verdict': "
                              f"{rec['verdict']!r} is not pass/fail")
        verdict.append(rec["verdict"])
    return Report(k=k, variance=variance, se_var=se_var, oracle_var=oracle,
                  verdict=verdict, config_hash=_config_hash(comments))


@dataclass(frozen=True)
class Sweep:
    c: np.ndarray
    median: np.ndarray
    p90: np.ndarray
    metric: list
    slopes: dict                # metric -> fitted slope from the comments
    config_hash: str


def read_sweep(path) -> Sweep:
    comments, body = _split_comments(path)
    if not body:
        raise SchemaError(f"{path}: empty sweep file")
    slopes = {}
    for cmt in comments:
        if cmt.startswith("slope[") and "]=" in cmt:
            metric, value = cmt[6:].split("]=", 1)
            slopes[metric] = _float_cell(path, 0, f"slope[{metric}]", value)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    _check_header(path, rows[0], SWEEP_COLUMNS)
    if len(rows) < 2:
        raise SchemaError(f"{path}: sweep has a header but no rows")
    n = len(rows) - 1
    c, median, p90 = (np.empty(n) for _ in range(3))
    metric = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(SWEEP_COLUMNS):
            raise SchemaError(f"{path}: row {i}: expected "
                              f"{len(SWEEP_COLUMNS)} cells, got {len(row)}")
        rec = dict(zip(SWEEP_COLUMNS, row))
        c[i - 2] = _float_cell(path, i, "c", rec["c"])
        median[i - 2] = _float_cell(path, i, "median", rec["median"])
        p90[i - 2] = _float_cell(path, i, "p90", rec["p90"])
        metric.append(rec["metric"])
    return Sweep(c=c, median=median, p90=p90, metric=metric, slopes=slopes,
                 config_hash=_config_hash(comments))
