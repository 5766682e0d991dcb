"""Shared fixtures.  The heavy Monte Carlo batches are session-scoped and
lazy, so each is simulated once and reused by module and acceptance tests."""

import math

import numpy as np
import pytest

from alesim import chain, limits
from alesim.analysis import bulk_grid_error, fluct_modes, poisson_integral_modes
from alesim.config import SimConfig

MASTER_SEED = 20260823
K_FLUCT = 4


def make_config(**kw):
    kw.setdefault("T", 1.0)
    return SimConfig.from_dict(kw)


@pytest.fixture(scope="session")
def bulk_batches():
    """20 seeded runs per (alpha, eta) in {(1,0), (2,-1)} and c in
    {1e-3, 1e-4}: bulk errors, and coupled mode gaps for the (1,0) runs."""
    out = {}
    for alpha, eta in ((1.0, 0.0), (2.0, -1.0)):
        for c in (1e-3, 1e-4):
            cfg = make_config(alpha=alpha, eta=eta, c=c,
                              keep_events=(alpha == 1.0))
            runs = []
            for rep in range(20):
                traj = chain.run(cfg, seed=MASTER_SEED, replica=rep)
                entry = {
                    "sup_cap_err": traj.sup_cap_err,
                    "bulk_err": bulk_grid_error(traj.cluster),
                    "violations": traj.violations,
                    "n_particles": traj.cluster.n_particles,
                    "cap_final": traj.cluster.total_capacity,
                }
                if alpha == 1.0:
                    psi = fluct_modes(traj.cluster, 1.0, cfg.params, K_FLUCT)
                    pi, _ = poisson_integral_modes(traj.events, 1.0,
                                                   cfg.params, K_FLUCT)
                    entry["coupling_gap"] = np.abs(psi - pi)
                runs.append(entry)
            out[(alpha, eta, c)] = (cfg, runs)
    return out


def _fluct_replicas(alpha, eta, c=1e-3, n_reps=400, seed=MASTER_SEED):
    cfg = make_config(alpha=alpha, eta=eta, c=c)
    zeta = cfg.params.zeta
    tau_T = limits.tau(1.0, zeta)
    modes = np.zeros((n_reps, K_FLUCT + 1), dtype=np.complex128)
    pi_modes = np.zeros_like(modes)
    caps = np.zeros(n_reps)
    pi_caps = np.zeros(n_reps)
    violations = np.zeros(n_reps, dtype=int)
    for rep in range(n_reps):
        traj = chain.run(cfg, seed=seed, replica=rep)
        violations[rep] = traj.violations
        modes[rep] = fluct_modes(traj.cluster, 1.0, cfg.params, K_FLUCT)
        caps[rep] = (traj.cluster.total_capacity - tau_T) / math.sqrt(c)
        pi_modes[rep], pi_caps[rep] = poisson_integral_modes(
            traj.events, 1.0, cfg.params, K_FLUCT)
    clean = violations == 0
    return cfg, {"modes": modes[clean], "caps": caps[clean],
                 "pi_modes": pi_modes[clean], "pi_caps": pi_caps[clean],
                 "n_excluded": int((~clean).sum())}


@pytest.fixture(scope="session")
def fluct_batch():
    """Lazily built 400-replica fluctuation batches keyed by (alpha, eta)."""
    cache = {}

    def get(alpha, eta):
        key = (alpha, eta)
        if key not in cache:
            cache[key] = _fluct_replicas(alpha, eta)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def poisson_baseline():
    """500 replicas of the constant-rate case (alpha = eta = 0) at c = 1e-2."""
    cfg = make_config(alpha=0.0, eta=0.0, c=1e-2, keep_events=False)
    caps = np.zeros(500)
    counts = np.zeros(500, dtype=int)
    for rep in range(500):
        traj = chain.run(cfg, seed=MASTER_SEED, replica=rep)
        caps[rep] = traj.cluster.total_capacity
        counts[rep] = traj.cluster.n_particles
    return cfg, caps, counts


@pytest.fixture(scope="session")
def capacity_sweep():
    """Convergence sweep for alpha = eta = 0 over c = 1e-2, 1e-3, 1e-4."""
    from alesim.analysis import convergence_sweep
    base = make_config(alpha=0.0, eta=0.0, c=1e-2, keep_events=False)
    return convergence_sweep(base, [1e-2, 1e-3, 1e-4], 20,
                             seed=MASTER_SEED)


@pytest.fixture(scope="session")
def eden_discrete():
    """20 discrete-skeleton runs of the Eden point (2, -1), N = 5000."""
    cfg = SimConfig.from_dict({"alpha": 2.0, "eta": -1.0, "c": 1e-4,
                               "N": 5000, "keep_events": False})
    finals = np.zeros(20)
    violations = np.zeros(20, dtype=int)
    for rep in range(20):
        traj = chain.run_discrete(cfg, seed=MASTER_SEED, replica=rep)
        finals[rep] = traj.cap_path[-1]
        violations[rep] = traj.violations
    return cfg, finals, violations


@pytest.fixture(scope="session")
def limit_paths():
    """2000 exact-transition paths of the (0,0) limit modes at T = 1."""
    params = chain.ModelParams(0.0, 0.0, 0.25, 1e-3)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence((MASTER_SEED, 9999))))
    oracle = limits.LimitOracle(params)
    modes, caps = oracle.sample_paths(K_FLUCT, [0.5, 1.0], 2000, rng)
    return params, modes, caps


@pytest.fixture(scope="session")
def cluster_1000():
    """One ~1000-particle cluster grown at (1, 0), c = 1e-3."""
    cfg = make_config(alpha=1.0, eta=0.0, c=1e-3, keep_events=False)
    traj = chain.run(cfg, seed=MASTER_SEED, replica=0)
    return cfg, traj
