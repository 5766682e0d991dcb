"""Config round-trips, batch orchestration, resume, and the CLI contract."""

import json
import math

import numpy as np
import pytest

from alesim import cli, harness
from alesim.config import SimConfig
from alesim.errors import ConfigError

from conftest import MASTER_SEED


def _quick_config(**extra):
    d = {"alpha": 0.0, "eta": 0.25, "c": 1e-2, "T": 1.0, "replicas": 3,
         "seed": MASTER_SEED, "snapshots": 8}
    d.update(extra)
    return SimConfig.from_dict(d)


# -- config files --------------------------------------------------------------

def test_config_save_load_roundtrip(tmp_path):
    cfg = _quick_config()
    path = tmp_path / "config.json"
    harness.save_config(cfg, path)
    assert harness.load_config(path) == cfg
    assert harness.load_config(path).config_hash() == cfg.config_hash()


def test_minimal_config_defaults():
    cfg = SimConfig.from_dict({"c": 1e-3, "T": 1.0})
    assert cfg.params.sigma == pytest.approx(1e-3 ** 0.2, rel=1e-12)
    assert cfg.sigma_rule == "c^0.2"
    assert cfg.k_modes == 32 and cfg.fluct_radius == 1.5 and cfg.grid_m == 512


def test_config_rejections(tmp_path):
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"alpha": -0.25, "eta": -0.25, "c": 1e-3, "T": 3.0})
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"c": 1e-3, "T": 1.0, "N": 100})
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"c": 1e-3, "T": 1.0, "bogus_knob": 7})
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"c": 1e-3, "T": 1.0, "M": 500})  # not a power of 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"c": 1e-3,\n  "T": }\n')
    with pytest.raises(ConfigError, match="line 2"):
        harness.load_config(bad)
    with pytest.raises(ConfigError, match="not found"):
        harness.load_config(tmp_path / "missing.json")


def test_preset_configs_validate():
    for name in harness.PRESETS:
        cfg = harness.preset_config(name)
        assert cfg.replicas >= 20
    with pytest.raises(ConfigError):
        harness.preset_config("nope")


def test_config_hash_sensitivity():
    a = _quick_config()
    b = _quick_config(c=2e-2)
    assert a.config_hash() != b.config_hash()
    assert a.config_hash() == _quick_config().config_hash()


# -- batches ---------------------------------------------------------------------

@pytest.fixture(scope="module")
def batch_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "batch"
    harness.run_batch(_quick_config(), out)
    return out


def test_run_batch_layout(batch_dir):
    assert (batch_dir / "config.json").exists()
    manifest = json.loads((batch_dir / "manifest.json").read_text())
    assert manifest["replicas"] == 3
    assert manifest["envelope_violations"] == 0
    assert {"alesim", "numpy", "numba", "python"} <= set(manifest["versions"])
    for rep in range(3):
        rd = batch_dir / f"replica_{rep:04d}"
        assert (rd / "summary.json").exists()
        assert (rd / "events.jsonl").exists()
        head = (rd / "snapshots.csv").read_text().splitlines()
        assert head[0] == "t,cap,n_particles,sup_cap_err"
        assert len(head) == 1 + 8 + 1  # header + snapshots + initial time
    summaries = manifest["summaries"]
    assert [s["replica"] for s in summaries] == [0, 1, 2]
    assert all(s["config_hash"] == manifest["config_hash"] for s in summaries)


def test_run_batch_resume(batch_dir, tmp_path):
    # deleting one replica's completion marker reruns exactly that replica
    marker = batch_dir / "replica_0001" / "summary.json"
    before = json.loads(marker.read_text())
    elapsed0 = json.loads(
        (batch_dir / "replica_0000" / "summary.json").read_text())["elapsed_s"]
    marker.unlink()
    harness.run_batch(_quick_config(), batch_dir)
    after = json.loads(marker.read_text())
    assert after["n_events"] == before["n_events"]
    assert after["cap_final"] == before["cap_final"]
    assert json.loads((batch_dir / "replica_0000" / "summary.json")
                      .read_text())["elapsed_s"] == elapsed0  # untouched


def test_run_batch_parallel_bit_identical(batch_dir, tmp_path):
    out2 = tmp_path / "parallel"
    harness.run_batch(_quick_config(), out2, parallelism=2)
    for rep in range(3):
        a = (batch_dir / f"replica_{rep:04d}" / "events.jsonl").read_bytes()
        b = (out2 / f"replica_{rep:04d}" / "events.jsonl").read_bytes()
        assert a == b


def test_load_replica_trajectory(batch_dir):
    cfg, events, cluster = harness.load_replica_trajectory(batch_dir, 0)
    summary = json.loads(
        (batch_dir / "replica_0000" / "summary.json").read_text())
    assert cluster.n_particles == summary["n_particles"]
    assert cluster.total_capacity == pytest.approx(summary["cap_final"],
                                                   rel=1e-12)
    assert len(events) == summary["n_events"]


def test_analyze_runs_refuses_mixed_hashes(batch_dir, tmp_path):
    other = tmp_path / "other"
    harness.run_batch(_quick_config(c=2e-2), other)
    with pytest.raises(ConfigError, match="config hashes"):
        harness.analyze_runs([batch_dir, other])
    # force proceeds (statistics may fail with so few replicas on a band,
    # but MIN_REPLICAS rejects 6 first)
    with pytest.raises(ConfigError, match="replicas"):
        harness.analyze_runs([batch_dir, other], force=True)


# -- command line -----------------------------------------------------------------

def test_cli_oracle_tau(capsys):
    rc = cli.main(["oracle", "--tau", "--zeta", "0.5", "--t", "2"])
    assert rc == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "quantity,argument,value"
    name, arg, val = out[1].split(",")
    assert name == "tau" and float(val) == pytest.approx(2 * math.log(2),
                                                         rel=1e-8)


def test_cli_oracle_modes(capsys):
    rc = cli.main(["oracle", "--q", "--zeta", "1.5", "--sigma", "0.1",
                   "--kmax", "8"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 10
    vals = [float(l.split(",")[2]) for l in lines[1:]]
    assert any(v < 0 for v in vals)  # the zeta > 1 unstable band shows up


def test_cli_oracle_empty_request():
    assert cli.main(["oracle", "--zeta", "0.5"]) == 1


def test_cli_simulate_and_trace(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    harness.save_config(_quick_config(replicas=1), cfg_path)
    rc = cli.main(["simulate", "--config", str(cfg_path),
                   "--out", str(tmp_path / "run")])
    assert rc == 0
    assert (tmp_path / "run" / "manifest.json").exists()

    rc = cli.main(["trace", "--config", str(cfg_path), "--samples", "256",
                   "--out", str(tmp_path / "trace.csv")])
    assert rc == 0
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "re,im"
    assert len(lines) == 2 + 256
    pts = np.array([[float(x) for x in l.split(",")] for l in lines[2:]])
    # the boundary surrounds the unit disk
    assert np.hypot(pts[:, 0], pts[:, 1]).min() > 0.99


def test_cli_error_exit_codes(tmp_path, capsys):
    assert cli.main([]) == 1
    assert cli.main(["simulate", "--out", str(tmp_path / "x")]) == 1  # no config
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert cli.main(["simulate", "--config", str(bad),
                     "--out", str(tmp_path / "y")]) == 1
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])  # argparse rejects unknown subcommands


def test_cli_seed_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    harness.save_config(_quick_config(replicas=1), cfg_path)
    cli.main(["simulate", "--config", str(cfg_path), "--seed", "7",
              "--out", str(tmp_path / "a")])
    cli.main(["simulate", "--config", str(cfg_path), "--seed", "7",
              "--out", str(tmp_path / "b")])
    cli.main(["simulate", "--config", str(cfg_path), "--seed", "8",
              "--out", str(tmp_path / "c")])
    ev = [(tmp_path / d / "replica_0000" / "events.jsonl").read_bytes()
          for d in "abc"]
    assert ev[0] == ev[1] != ev[2]
