"""The three figure kinds.  Deterministic byte output: Agg backend, fixed
style, empty savefig metadata, and svg.hashsalt pinned to the style seed."""

from __future__ import annotations

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import SchemaError, read_report, read_sweep, read_trace

PASS_COLOR = "#2a7e43"
FAIL_COLOR = "#b0413e"

# metadata keys matplotlib would otherwise fill with timestamps/versions
_STRIP_METADATA = {"png": {"Software": None},
                   "svg": {"Date": None, "Creator": None}}


def apply_style(seed: int = 0):
    """Fixed deterministic style; the seed only salts SVG element ids."""
    plt.rcdefaults()
    plt.rcParams.update({
        "figure.figsize": (6.0, 4.5),
        "figure.dpi": 120,
        "savefig.dpi": 120,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "svg.hashsalt": str(seed),
    })


def _save(fig, output):
    fmt = str(output).rsplit(".", 1)[-1].lower()
    fig.savefig(output, metadata=_STRIP_METADATA.get(fmt, {}))
    plt.close(fig)


def plot_boundary(trace_csv, output, tau: float | None = None,
                  band: float = 0.05):
    """Boundary polyline with the unit circle and an e^tau reference circle.

    tau defaults to the log of the mean boundary radius, so the reference
    circle is the one the bulk limit predicts when the capacity estimate
    is taken from the trace itself.  A tau +- band annulus is shaded.
    """
    trace = read_trace(trace_csv)
    pts = trace.points
    if tau is None:
        tau = float(np.log(np.abs(pts)).mean())
    th = np.linspace(0, 2 * math.pi, 721)
    fig, ax = plt.subplots()
    ax.fill_between(np.cos(th) * 0, 0, 0)  # keep autoscale sane pre-plot
    r_lo, r_hi = math.exp(tau - band), math.exp(tau + band)
    ax.fill(np.concatenate([r_hi * np.cos(th), r_lo * np.cos(th[::-1])]),
            np.concatenate([r_hi * np.sin(th), r_lo * np.sin(th[::-1])]),
            color="#d9c27a", alpha=0.35, lw=0,
            label=f"exp(tau +- {band:g}) annulus")
    ax.plot(np.cos(th), np.sin(th), "--", color="0.4", lw=0.8,
            label="unit circle")
    ax.plot(math.exp(tau) * np.cos(th), math.exp(tau) * np.sin(th), "-",
            color="0.2", lw=0.8, label=f"radius e^tau = {math.exp(tau):.3f}")
    closed = np.append(pts, pts[0])
    ax.plot(closed.real, closed.imag, color="#1f4e79", lw=0.9,
            label=f"cluster boundary ({pts.size} pts)")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=7)
    if trace.config_hash:
        ax.set_title(f"config {trace.config_hash}", fontsize=8)
    _save(fig, output)
    return tau


def plot_variance(report_csvs, output, oracle_csv=None):
    """Per-mode variance with 3-s.e. bars, oracle curve, verdict coloring.

    Multiple report CSVs must carry the same config hash; points are
    drawn per file with a small horizontal offset.
    """
    if isinstance(report_csvs, (str, bytes)) or hasattr(report_csvs, "exists"):
        report_csvs = [report_csvs]
    reports = [read_report(p) for p in report_csvs]
    hashes = {r.config_hash for r in reports if r.config_hash}
    if len(hashes) > 1:
        raise SchemaError(f"refusing to mix config hashes {sorted(hashes)}")
    fig, ax = plt.subplots()
    width = 0.8 / max(len(reports), 1)
    for j, rep in enumerate(reports):
        xs = rep.k + (j - (len(reports) - 1) / 2) * width * 0.5
        colors = [PASS_COLOR if v == "pass" else FAIL_COLOR
                  for v in rep.verdict]
        ax.errorbar(xs, rep.variance, yerr=3 * rep.se_var, fmt="none",
                    ecolor="0.3", elinewidth=0.8, capsize=2)
        ax.scatter(xs, rep.variance, c=colors, s=18, zorder=3,
                   label=f"empirical ({len(rep.k)} modes)" if j == 0 else None)
        if np.isfinite(rep.oracle_var).any() and j == 0:
            ax.plot(rep.k, rep.oracle_var, "-", color="0.15", lw=1.0,
                    label="oracle")
    if oracle_csv is not None:
        ks, vals = _read_oracle_curve(oracle_csv)
        ax.plot(ks, vals, ":", color="#7a4e9e", lw=1.2, label="oracle file")
    ax.set_xlabel("mode k")
    ax.set_ylabel("variance")
    ax.legend(fontsize=7)
    if hashes:
        ax.set_title(f"config {next(iter(hashes))}", fontsize=8)
    _save(fig, output)


def _read_oracle_curve(path):
    """`quantity,argument,value` rows (the oracle CLI output)."""
    ks, vals = [], []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "quantity,argument,value":
            raise SchemaError(f"{path}: not an oracle CSV "
                              f"(header {header!r})")
        for i, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != 3:
                raise SchemaError(f"{path}: row {i}: expected 3 cells")
            ks.append(float(parts[1].split("=")[-1]))
            vals.append(float(parts[2]))
    return np.asarray(ks), np.asarray(vals)


def plot_sweep(sweep_csv, output, metric: str = "cap_err"):
    """Log-log median error vs c with the fitted slope and a 1/2 guide."""
    sweep = read_sweep(sweep_csv)
    mask = np.array([m == metric for m in sweep.metric])
    if not mask.any():
        raise SchemaError(f"{sweep_csv}: no rows with metric {metric!r} "
                          f"(have {sorted(set(sweep.metric))})")
    c, med, p90 = sweep.c[mask], sweep.median[mask], sweep.p90[mask]
    order = np.argsort(c)
    c, med, p90 = c[order], med[order], p90[order]
    fig, ax = plt.subplots()
    ax.loglog(c, med, "o-", color="#1f4e79", label=f"median {metric}")
    ax.loglog(c, p90, "s--", color="#1f4e79", alpha=0.5, lw=0.8,
              label=f"p90 {metric}")
    # fixed reference: slope exactly 1/2 through the last median point
    guide = med[-1] * np.sqrt(c / c[-1])
    ax.loglog(c, guide, ":", color="0.3", label="slope 1/2 guide")
    slope = sweep.slopes.get(metric)
    if slope is not None:
        ax.annotate(f"fitted slope = {slope:.3f}", xy=(0.05, 0.9),
                    xycoords="axes fraction", fontsize=9)
    ax.set_xlabel("c")
    ax.set_ylabel("error")
    ax.legend(fontsize=7)
    _save(fig, output)
    return slope
