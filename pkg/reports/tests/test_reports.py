"""Schema validation, figure generation, and byte-determinism."""

import math

import numpy as np
import pytest

from alereports import (SchemaError, apply_style, plot_boundary, plot_sweep,
                        plot_variance, read_report, read_sweep, read_trace)
from alereports.cli import main as cli_main

REPORT_HEADER = ("k,mean_re,mean_im,variance,se_var,se_mean,"
                 "excess_kurtosis,oracle_var,z_var,verdict")


def _write_trace(path, n=256, radius=1.0, config_hash="abc123"):
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write("re,im\n")
        for t in th:
            fh.write(f"{radius * math.cos(t):.12g},"
                     f"{radius * math.sin(t):.12g}\n")


def _write_report(path, config_hash="abc123", verdicts=None):
    verdicts = verdicts or ["pass"] * 5
    with open(path, "w") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        fh.write(REPORT_HEADER + "\n")
        for k, v in enumerate(verdicts):
            var = 2.0 / (1 + k)
            fh.write(f"{k},0.01,-0.02,{var:.6g},{var / 20:.6g},0.03,"
                     f"0.1,{var * 1.02:.6g},0.5,{v}\n")


def _write_sweep(path, slope=0.495):
    with open(path, "w") as fh:
        fh.write(f"# slope[cap_err]={slope:.6f}\n")
        fh.write("# slope[bulk_err]=0.471000\n")
        fh.write("c,sigma,metric,median,p90,n_replicas\n")
        for c, m in ((1e-2, 0.05), (1e-3, 0.016), (1e-4, 0.005)):
            fh.write(f"{c:g},0.25,cap_err,{m:g},{m * 1.6:g},20\n")
            fh.write(f"{c:g},0.25,bulk_err,{m * 0.8:g},{m * 1.3:g},20\n")


# -- schema validation -----------------------------------------------------

def test_read_trace_roundtrip(tmp_path):
    p = tmp_path / "trace.csv"
    _write_trace(p, n=64, radius=1.5)
    tr = read_trace(p)
    assert tr.config_hash == "abc123"
    assert tr.points.shape == (64,)
    assert np.allclose(np.abs(tr.points), 1.5)


def test_trace_schema_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_trace(p)
    p.write_text("x,y\n1,2\n")
    with pytest.raises(SchemaError, match="missing columns"):
        read_trace(p)
    p.write_text("re,im\n1,oops\n")
    with pytest.raises(SchemaError, match="column 'im'"):
        read_trace(p)
    p.write_text("re,im\n")
    with pytest.raises(SchemaError, match="no points"):
        read_trace(p)


def test_report_schema_errors(tmp_path):
    p = tmp_path / "rep.csv"
    p.write_text(REPORT_HEADER.replace("verdict", "status") + "\n")
    with pytest.raises(SchemaError, match="verdict"):
        read_report(p)
    p.write_text(REPORT_HEADER + "\n0,0,0,1,0.1,0.1,0,1,0,maybe\n")
    with pytest.raises(SchemaError, match="pass/fail"):
        read_report(p)


def test_report_optional_oracle_columns(tmp_path):
    p = tmp_path / "rep.csv"
    p.write_text(REPORT_HEADER + "\n0,0,0,1,0.1,0.1,0,,,pass\n")
    rep = read_report(p)
    assert math.isnan(rep.oracle_var[0])
    assert rep.config_hash == ""


def test_sweep_reader(tmp_path):
    p = tmp_path / "sweep.csv"
    _write_sweep(p, slope=0.512)
    sw = read_sweep(p)
    assert sw.slopes == {"cap_err": 0.512, "bulk_err": 0.471}
    assert sw.c.shape == (6,)
    p.write_text("c,sigma,metric,median,p90,n_replicas\n")
    with pytest.raises(SchemaError, match="no rows"):
        read_sweep(p)


# -- figures ------------------------------------------------------------------

def test_boundary_figure(tmp_path):
    trace = tmp_path / "trace.csv"
    _write_trace(trace, radius=1.0)  # empty-cluster analogue: a circle
    out = tmp_path / "boundary.png"
    apply_style(0)
    tau = plot_boundary(trace, out)
    assert out.exists() and out.stat().st_size > 0
    assert tau == pytest.approx(0.0, abs=1e-9)  # unit-radius trace


def test_variance_figure_and_hash_guard(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    _write_report(a, config_hash="aaaa")
    _write_report(b, config_hash="bbbb")
    apply_style(0)
    plot_variance([a], tmp_path / "v.png")
    assert (tmp_path / "v.png").exists()
    with pytest.raises(SchemaError, match="config hashes"):
        plot_variance([a, b], tmp_path / "v2.png")


def test_sweep_figure_slope_annotation(tmp_path):
    p = tmp_path / "sweep.csv"
    _write_sweep(p, slope=0.4955)
    apply_style(0)
    slope = plot_sweep(p, tmp_path / "s.svg")
    assert f"{slope:.3f}" == "0.495"  # annotation text uses 3 decimals


# -- determinism and the CLI ------------------------------------------------------

@pytest.mark.parametrize("ext", ["png", "svg"])
def test_byte_deterministic_output(tmp_path, ext):
    trace = tmp_path / "trace.csv"
    _write_trace(trace, n=128, radius=1.2)
    outs = []
    for name in ("one", "two"):
        rc = cli_main(["--style-seed", "7", "boundary",
                       "--input", str(trace),
                       "--output", str(tmp_path / f"{name}.{ext}")])
        assert rc == 0
        outs.append((tmp_path / f"{name}.{ext}").read_bytes())
    assert outs[0] == outs[1]


def test_cli_exit_codes(tmp_path, capsys):
    assert cli_main([]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    rc = cli_main(["boundary", "--input", str(bad),
                   "--output", str(tmp_path / "x.png")])
    assert rc == 2
    assert "schema error" in capsys.readouterr().err

    rep = tmp_path / "rep.csv"
    _write_report(rep, verdicts=["pass", "fail", "pass"])
    assert cli_main(["variance", "--input", str(rep),
                     "--output", str(tmp_path / "v.png")]) == 0

    sweep = tmp_path / "sweep.csv"
    _write_sweep(sweep)
    assert cli_main(["sweep", "--input", str(sweep), "--metric", "bulk_err",
                     "--output", str(tmp_path / "s.png")]) == 0
    assert cli_main(["sweep", "--input", str(sweep), "--metric", "nope",
                     "--output", str(tmp_path / "s2.png")]) == 2
