"""Fluctuation statistics: mode extraction, Poisson-integral coupling,
replica aggregation and oracle comparison.

The rescaled observables are c^{-1/2} Psihat_T(k) (Laurent modes of the
normalized cluster map minus identity), c^{-1/2} (T_t - tau_t) (capacity
fluctuation) and their linear-in-the-marks counterparts Pi_t(k), Pi^cap_t
built from the recorded Poisson events.  In the small-particle limit all
of them converge to Ornstein-Uhlenbeck Gaussians whose exact covariances
come from the limits module.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from . import limits
from .chain import EventLog, Trajectory
from .conformal import ClusterMap, laurent_coeffs, schlicht_residual
from .errors import AleError, ConfigError

MIN_REPLICAS = 30


@dataclass(frozen=True)
class FluctSample:
    """Rescaled fluctuation observables of one replica at one time."""

    replica_id: int
    t: float
    modes: np.ndarray          # complex, k = 0..K: c^{-1/2} Psihat_t(k)
    cap: float                 # c^{-1/2} (T_t - tau_t)
    pi_modes: np.ndarray       # complex, k = 0..K: c^{-1/2} Pi_t(k)
    pi_cap: float              # c^{-1/2} Pi^cap_t
    k_modes: int = 0
    radius: float = 1.5


def fluct_modes(cluster: ClusterMap, t: float, params, K: int,
                r: float = 1.5, M: int = 512) -> np.ndarray:
    """c^{-1/2} times the Laurent modes of Psihat_t = Phihat_t - id."""
    series = laurent_coeffs(cluster, r=r, K=K, M=M)
    return series.coeffs / math.sqrt(params.c)


def cap_fluct(traj: Trajectory, t: float) -> float:
    """c^{-1/2} (T_t - tau_t) read off the snapshot at time t."""
    idx = np.flatnonzero(np.isclose(traj.snap_t, t, rtol=0, atol=1e-12))
    if idx.size == 0:
        raise ConfigError(f"no snapshot at t={t}")
    i = int(idx[0])
    zeta = traj.params.zeta
    return (float(traj.snap_cap[i]) - limits.tau(t, zeta)) / math.sqrt(
        traj.params.c)


def poisson_integral_modes(events: EventLog, t: float, params, K: int):
    """Rescaled Poisson integrals (Pi_t(0..K), Pi^cap_t) from the marks.

    Pi_t(k) = 2 sum_{pi-accepted, s <= t} e^{-(1+q(k))(tau_t - tau_s)}
              e^{i(k+1) theta_s} c_s  with c_s = c e^{-alpha tau_s}
    (the angular compensator integrates to zero for k >= 0);
    Pi^cap_t = sum e^{-zeta(tau_t - tau_s)} c_s - t/(1 + zeta t).
    """
    if events is None:
        raise AleError("event stream with vertical marks was not retained "
                       "(run with keep_events=True)")
    zeta = params.alpha + params.eta
    c = params.c
    tau_t = limits.tau(t, zeta)
    mask = events.pi_accepted & (events.s <= t)
    s = events.s[mask]
    th = events.theta[mask]
    tau_s = np.array([limits.tau(x, zeta) for x in s])
    c_s = c * np.exp(-params.alpha * tau_s)

    ks = np.arange(K + 1)
    qs = np.array([limits.multiplier_q(int(k), zeta, params.sigma)
                   for k in ks])
    # (K+1, n_events) kernel; event counts are ~1/c so this stays small
    decay = np.exp(-(1.0 + qs)[:, None] * (tau_t - tau_s)[None, :])
    phases = np.exp(1j * np.outer(ks + 1, th))
    modes = 2.0 * np.sum(decay * phases * c_s[None, :], axis=1)

    cap = float(np.sum(np.exp(-zeta * (tau_t - tau_s)) * c_s))
    cap -= t / (1.0 + zeta * t)
    scale = 1.0 / math.sqrt(c)
    return modes * scale, cap * scale


def sample_trajectory(traj: Trajectory, t: float, K: int, r: float = 1.5,
                      M: int = 512) -> FluctSample:
    """All four rescaled observables of one replica at snapshot time t."""
    idx = np.flatnonzero(np.isclose(traj.snap_t, t, rtol=0, atol=1e-12))
    if idx.size == 0:
        raise ConfigError(f"no snapshot at t={t}")
    i = int(idx[0])
    cluster = traj.cluster_at(i)
    modes = fluct_modes(cluster, t, traj.params, K, r=r, M=M)
    cap = cap_fluct(traj, t)
    pi_modes, pi_cap = poisson_integral_modes(traj.events, t, traj.params, K)
    return FluctSample(replica_id=traj.replica, t=t, modes=modes, cap=cap,
                       pi_modes=pi_modes, pi_cap=pi_cap, k_modes=K, radius=r)


# -- replica aggregation ---------------------------------------------------

@dataclass(frozen=True)
class ModeStat:
    k: int
    mean_re: float
    mean_im: float
    variance: float
    se_var: float
    se_mean: float
    excess_kurtosis: float
    kurtosis_limit: float
    oracle_var: float | None
    z_var: float | None
    passed: bool


@dataclass(frozen=True)
class StatReport:
    n_replicas: int
    var_band: float
    stats: tuple
    config_hash: str = ""

    @property
    def all_passed(self) -> bool:
        return all(s.passed for s in self.stats)

    def to_csv(self, path):
        with open(path, "w") as fh:
            if self.config_hash:
                fh.write(f"# config_hash={self.config_hash}\n")
            fh.write("k,mean_re,mean_im,variance,se_var,se_mean,"
                     "excess_kurtosis,oracle_var,z_var,verdict\n")
            for s in self.stats:
                ov = "" if s.oracle_var is None else f"{s.oracle_var:.12g}"
                zv = "" if s.z_var is None else f"{s.z_var:.6g}"
                fh.write(f"{s.k},{s.mean_re:.12g},{s.mean_im:.12g},"
                         f"{s.variance:.12g},{s.se_var:.6g},{s.se_mean:.6g},"
                         f"{s.excess_kurtosis:.6g},{ov},{zv},"
                         f"{'pass' if s.passed else 'fail'}\n")

    def to_json(self, path):
        payload = {
            "n_replicas": self.n_replicas,
            "var_band": self.var_band,
            "config_hash": self.config_hash,
            "stats": [vars(s) for s in self.stats],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1, default=float)


def _one_mode_stat(k, x, oracle_var, var_band, n):
    complex_input = np.iscomplexobj(x)
    mean = complex(np.mean(x))
    var = float(np.mean(np.abs(x - mean) ** 2))
    if complex_input:
        se_var = var / math.sqrt(n)            # complex Gaussian variance s.e.
        se_mean = math.sqrt(var / (2 * n))     # per component
        comps = np.concatenate([x.real, x.imag])
        kurt = float(sps.kurtosis(comps)) if var > 0 else 0.0
        kurt_lim = 4.0 * math.sqrt(24.0 / (2 * n))
    else:
        se_var = var * math.sqrt(2.0 / n)
        se_mean = math.sqrt(var / n)
        kurt = float(sps.kurtosis(np.real(x))) if var > 0 else 0.0
        kurt_lim = 4.0 * math.sqrt(24.0 / n)
    z_var = None
    passed = True
    if var == 0.0:
        kurt = math.inf  # degenerate input: flag the screen
        passed = False
    if oracle_var is not None:
        z_var = (var - oracle_var) / se_var if se_var > 0 else math.inf
        passed = passed and abs(var / oracle_var - 1.0) <= var_band
    if se_mean > 0:
        passed = passed and (abs(mean.real) <= 3 * se_mean
                             and abs(mean.imag) <= 3 * se_mean)
    passed = passed and abs(kurt) <= kurt_lim
    return ModeStat(k=k, mean_re=mean.real, mean_im=mean.imag, variance=var,
                    se_var=se_var, se_mean=se_mean, excess_kurtosis=kurt,
                    kurtosis_limit=kurt_lim, oracle_var=oracle_var,
                    z_var=z_var, passed=passed)


def replica_stats(values, oracle_vars=None, var_band: float = 0.2,
                  config_hash: str = "") -> StatReport:
    """Per-mode mean/variance/kurtosis report with oracle verdicts.

    values: array (N, K+1) complex (mode samples) or (N,) real (cap
    samples); oracle_vars: matching array of exact variances or None.
    """
    x = np.asarray(values)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < MIN_REPLICAS:
        raise ConfigError(f"need at least {MIN_REPLICAS} replicas, got {n}")
    if oracle_vars is not None:
        oracle_vars = np.asarray(oracle_vars, dtype=float).ravel()
        if oracle_vars.shape[0] != x.shape[1]:
            raise ConfigError("oracle variance count does not match modes")
    stats = tuple(
        _one_mode_stat(k, x[:, k],
                       None if oracle_vars is None else float(oracle_vars[k]),
                       var_band, n)
        for k in range(x.shape[1]))
    return StatReport(n_replicas=n, var_band=var_band, stats=stats,
                      config_hash=config_hash)


# -- convergence sweep -----------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    c: float
    sigma: float
    metric: str
    median: float
    p90: float
    n_replicas: int


@dataclass(frozen=True)
class SweepTable:
    rows: tuple
    slopes: dict  # metric -> fitted log-log slope of the median vs c

    def to_csv(self, path):
        with open(path, "w") as fh:
            for metric, slope in sorted(self.slopes.items()):
                fh.write(f"# slope[{metric}]={slope:.6f}\n")
            fh.write("c,sigma,metric,median,p90,n_replicas\n")
            for r in self.rows:
                fh.write(f"{r.c:.6g},{r.sigma:.6g},{r.metric},"
                         f"{r.median:.12g},{r.p90:.12g},{r.n_replicas}\n")

    def medians(self, metric: str) -> dict:
        return {r.c: r.median for r in self.rows if r.metric == metric}


def bulk_grid_error(cluster: ClusterMap, r: float = 1.5,
                    n_grid: int = 256) -> float:
    """max over the |z| = r grid of |Phihat_T(z) - z|."""
    zs = r * np.exp(2j * np.pi * np.arange(n_grid) / n_grid)
    return float(np.max(np.abs(schlicht_residual(cluster, zs))))


def convergence_sweep(base_config, c_list, n_replicas: int,
                      sigma_exponent: float = 0.2,
                      seed: int | None = None) -> SweepTable:
    """Run replicas at each c (with sigma = c^exponent) and tabulate the
    capacity and bulk errors with fitted log-log slopes."""
    from . import chain
    from .config import SimConfig

    if any(c2 >= c1 for c1, c2 in zip(c_list, c_list[1:])):
        raise ConfigError("capacity list must be strictly decreasing")
    master = base_config.master_seed if seed is None else seed
    rows = []
    med = {"cap_err": [], "bulk_err": []}
    for c in c_list:
        d = base_config.to_dict()
        d.update(c=c, replicas=n_replicas)
        d.pop("sigma", None)
        d.pop("sigma_rule", None)
        d["sigma_exponent"] = sigma_exponent
        cfg = SimConfig.from_dict(d)
        cap_errs = np.empty(n_replicas)
        bulk_errs = np.empty(n_replicas)
        for rep in range(n_replicas):
            traj = chain.run(cfg, seed=master, replica=rep)
            cap_errs[rep] = traj.sup_cap_err
            bulk_errs[rep] = bulk_grid_error(traj.cluster)
        for metric, errs in (("cap_err", cap_errs), ("bulk_err", bulk_errs)):
            rows.append(SweepRow(c=c, sigma=cfg.params.sigma, metric=metric,
                                 median=float(np.median(errs)),
                                 p90=float(np.percentile(errs, 90)),
                                 n_replicas=n_replicas))
            med[metric].append(float(np.median(errs)))
    slopes = {}
    for metric, ms in med.items():
        slope, _ = np.polyfit(np.log(np.asarray(c_list)), np.log(ms), 1)
        slopes[metric] = float(slope)
    return SweepTable(rows=tuple(rows), slopes=slopes)
