"""Batch orchestration: config files, replica runs, manifests, analysis.

Run-directory layout:

    out/
      config.json            the validated config, defaults echoed
      manifest.json          config hash, seeds, versions, per-replica summary
      replica_0000/
        events.jsonl         one proposal per line (if retention is on)
        snapshots.csv        t, cap, n_particles, sup_cap_err
        summary.json         seed, violations, sup_cap_err, ... (completion marker)

Replica outputs depend only on (config, master seed, replica index), so a
batch is bit-identical regardless of the parallelism degree, and a partial
batch resumes by skipping replicas whose summary.json already exists.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import chain, limits
from .analysis import replica_stats
from .config import SimConfig
from .errors import AleError, ConfigError

PRESETS = {
    "bulk-hl1": {"alpha": 1.0, "eta": 0.0, "c": 1e-4, "T": 1.0,
                 "sigma_exponent": 0.2, "replicas": 20},
    "eden": {"alpha": 2.0, "eta": -1.0, "c": 1e-4, "T": 1.0,
             "sigma_exponent": 0.2, "replicas": 20},
    "fluct-zeta0": {"alpha": 0.0, "eta": 0.0, "c": 1e-3, "T": 1.0,
                    "sigma_exponent": 0.2, "replicas": 400},
    "sweep-capacity": {"alpha": 0.0, "eta": 0.0, "c": 1e-2, "T": 1.0,
                       "sigma_exponent": 0.2, "replicas": 20},
}


def preset_config(name: str) -> SimConfig:
    try:
        return SimConfig.from_dict(PRESETS[name])
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


def load_config(path) -> SimConfig:
    """Load and validate a JSON config file; defaults are filled in."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error in {path} at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config root in {path} must be a JSON object")
    return SimConfig.from_dict(data)


def save_config(config: SimConfig, path):
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _versions() -> dict:
    import numba
    from . import __version__
    return {"alesim": __version__, "numpy": np.__version__,
            "numba": numba.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


def run_replica(config: SimConfig, out_dir, replica: int) -> dict:
    """Run one replica into out_dir/replica_NNNN; returns its summary."""
    rep_dir = Path(out_dir) / f"replica_{replica:04d}"
    rep_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    runner = chain.run if config.mode == "continuous" else chain.run_discrete
    traj = runner(config, seed=config.master_seed, replica=replica)
    traj.write_snapshots_csv(rep_dir / "snapshots.csv")
    if traj.events is not None:
        traj.events.write_jsonl(rep_dir / "events.jsonl")
    summary = {
        "replica": replica,
        "seed": config.master_seed,
        "config_hash": config.config_hash(),
        "violations": traj.violations,
        "aborted": traj.aborted,
        "sup_cap_err": traj.sup_cap_err,
        "n_events": 0 if traj.events is None else len(traj.events),
        "n_particles": traj.cluster.n_particles,
        "cap_final": traj.cluster.total_capacity,
        "elapsed_s": time.perf_counter() - t0,
    }
    with open(rep_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1)
    return summary


def _replica_job(args):
    config_dict, out_dir, replica = args
    return run_replica(SimConfig.from_dict(config_dict), out_dir, replica)


def run_batch(config: SimConfig, out_dir, parallelism: int = 1) -> Path:
    """Run all replicas of a config into a run directory; returns its path.

    Already-completed replicas (summary.json present) are skipped, so an
    interrupted batch resumes where it stopped.  Per-replica failures are
    recorded in the manifest and do not stop the batch.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(config, out_dir / "config.json")

    pending = []
    for rep in range(config.replicas):
        if not (out_dir / f"replica_{rep:04d}" / "summary.json").exists():
            pending.append(rep)

    failures = {}
    if parallelism > 1 and len(pending) > 1:
        jobs = [(config.to_dict(), str(out_dir), rep) for rep in pending]
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for rep, result in zip(pending, pool.map(_replica_job, jobs)):
                del result  # summaries re-read below for uniformity
    else:
        for rep in pending:
            try:
                run_replica(config, out_dir, rep)
            except AleError as exc:
                failures[rep] = str(exc)

    summaries = []
    for rep in range(config.replicas):
        summary_path = out_dir / f"replica_{rep:04d}" / "summary.json"
        if summary_path.exists():
            with open(summary_path) as fh:
                summaries.append(json.load(fh))
        else:
            summaries.append({"replica": rep,
                              "error": failures.get(rep, "not run")})

    manifest = {
        "config_hash": config.config_hash(),
        "master_seed": config.master_seed,
        "replicas": config.replicas,
        "versions": _versions(),
        "envelope_violations": sum(s.get("violations", 0) for s in summaries),
        "summaries": summaries,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
    return out_dir


# -- post-hoc analysis of a run directory -----------------------------------

def load_replica_trajectory(run_dir, replica: int,
                            config: SimConfig | None = None):
    """Rebuild a trajectory from a replica's persisted event log."""
    run_dir = Path(run_dir)
    if config is None:
        config = load_config(run_dir / "config.json")
    events_path = run_dir / f"replica_{replica:04d}" / "events.jsonl"
    if not events_path.exists():
        raise ConfigError(f"no event log for replica {replica} in {run_dir}")
    events = chain.EventLog.read_jsonl(events_path)
    cluster = chain.ClusterMap()
    for i in np.flatnonzero(events.chain_accepted):
        cluster = cluster.append(float(events.c_event[i]),
                                 float(events.theta[i]))
    return config, events, cluster


def analyze_runs(run_dirs, t: float | None = None, force: bool = False):
    """Aggregate fluctuation statistics across run directories against the
    exact limit oracle.  Refuses mixed config hashes unless force=True.
    Replicas with envelope violations are excluded.  Returns (StatReport
    for the modes, StatReport for cap)."""
    run_dirs = [Path(d) for d in run_dirs]
    configs = [load_config(d / "config.json") for d in run_dirs]
    hashes = {c.config_hash() for c in configs}
    if len(hashes) > 1 and not force:
        raise ConfigError(
            f"refusing to mix config hashes {sorted(hashes)}; use --force")
    config = configs[0]
    if config.mode != "continuous":
        raise ConfigError("analysis of fluctuation modes needs continuous runs")
    t = float(config.horizon) if t is None else t
    K = min(config.k_modes, 8)

    mode_samples, cap_samples = [], []
    for d, cfg in zip(run_dirs, configs):
        with open(d / "manifest.json") as fh:
            manifest = json.load(fh)
        for summary in manifest["summaries"]:
            if "error" in summary or summary.get("violations", 0) > 0 \
                    or summary.get("aborted", False):
                continue
            rep = summary["replica"]
            events_path = d / f"replica_{rep:04d}" / "events.jsonl"
            if not events_path.exists():
                continue
            events = chain.EventLog.read_jsonl(events_path)
            acc = events.chain_accepted & (events.s <= t)
            cluster = chain.ClusterMap()
            for i in np.flatnonzero(acc):
                cluster = cluster.append(float(events.c_event[i]),
                                         float(events.theta[i]))
            cap_t = float(np.sum(events.c_event[acc]))
            zeta = cfg.params.zeta
            cap_samples.append(
                (cap_t - limits.tau(t, zeta)) / math.sqrt(cfg.params.c))
            from .analysis import fluct_modes
            mode_samples.append(fluct_modes(cluster, t, cfg.params, K,
                                            r=cfg.fluct_radius,
                                            M=cfg.grid_m))
    if not mode_samples:
        raise ConfigError("no clean replicas found to analyze")
    params = config.params
    oracle_modes = [limits.ou_covariance(k, t, params) for k in range(K + 1)]
    oracle_cap = [limits.ou_covariance(0, t, params, flavor="cap")]
    report_modes = replica_stats(np.array(mode_samples), oracle_modes,
                                 config_hash=config.config_hash())
    report_cap = replica_stats(np.array(cap_samples), oracle_cap,
                               config_hash=config.config_hash())
    return report_modes, report_cap
