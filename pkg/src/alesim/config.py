"""Run configuration: validation, defaults, serialization, hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import limits
from .chain import ModelParams
from .errors import ConfigError

DEFAULT_SIGMA_EXPONENT = 0.2


def sigma_from_rule(c: float, exponent: float = DEFAULT_SIGMA_EXPONENT) -> float:
    """Default regularization rule sigma = c^exponent."""
    return c ** exponent


@dataclass(frozen=True)
class SimConfig:
    """Complete, validated description of one experiment."""

    params: ModelParams
    mode: str = "continuous"           # or "discrete"
    horizon: float = 1.0               # T (continuous) or N (discrete)
    k_modes: int = 32
    fluct_radius: float = 1.5
    grid_m: int = 512
    n_snapshots: int = 32
    replicas: int = 1
    master_seed: int = 0
    keep_events: bool = True
    max_events: int = 10_000_000
    sigma_rule: str = "explicit"       # provenance of sigma: "explicit" or "c^p"

    def __post_init__(self):
        p = self.params
        if self.mode not in ("continuous", "discrete"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "continuous":
            t_c = limits.t_crit(p.zeta)
            if not 0 < self.horizon < t_c:
                raise ConfigError(
                    f"horizon T={self.horizon} must lie in (0, t_crit={t_c}) "
                    f"for zeta={p.zeta}")
        else:
            n = self.horizon
            if n != int(n) or n < 1:
                raise ConfigError("discrete horizon N must be a positive integer")
            if p.alpha < 0 and p.c * n >= limits.n_crit(p.alpha):
                raise ConfigError(
                    f"N={int(n)} reaches the blow-up count "
                    f"n_crit/c={limits.n_crit(p.alpha) / p.c:.6g} for alpha<0")
        if self.grid_m < 4 * self.k_modes or self.grid_m & (self.grid_m - 1):
            raise ConfigError("grid_m must be a power of two with M >= 4K")
        if not self.fluct_radius > 1.0:
            raise ConfigError("fluctuation radius must exceed 1")
        if self.n_snapshots < 1 or self.replicas < 1 or self.max_events < 1:
            raise ConfigError("counts must be positive")

    def snapshot_times(self) -> np.ndarray:
        """Uniform snapshot schedule: n_snapshots interior/endpoint times
        plus the initial time."""
        return np.linspace(0.0, float(self.horizon), self.n_snapshots + 1)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        p = self.params
        return {
            "alpha": p.alpha, "eta": p.eta, "sigma": p.sigma, "c": p.c,
            "mode": self.mode, "horizon": self.horizon,
            "k_modes": self.k_modes, "fluct_radius": self.fluct_radius,
            "grid_m": self.grid_m, "n_snapshots": self.n_snapshots,
            "replicas": self.replicas, "master_seed": self.master_seed,
            "keep_events": self.keep_events, "max_events": self.max_events,
            "sigma_rule": self.sigma_rule,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "c" not in d:
            raise ConfigError("config requires the capacity parameter 'c'")
        c = float(d.pop("c"))
        alpha = float(d.pop("alpha", 0.0))
        eta = float(d.pop("eta", 0.0))
        if "sigma" in d:
            sigma = float(d.pop("sigma"))
            rule = d.pop("sigma_rule", "explicit")
        else:
            exponent = float(d.pop("sigma_exponent", DEFAULT_SIGMA_EXPONENT))
            sigma = sigma_from_rule(c, exponent)
            rule = f"c^{exponent:g}"
            d.pop("sigma_rule", None)
        params = ModelParams(alpha=alpha, eta=eta, sigma=sigma, c=c)

        if "T" in d and "N" in d:
            raise ConfigError("give either T (continuous) or N (discrete)")
        if "T" in d:
            d["horizon"] = float(d.pop("T"))
            d.setdefault("mode", "continuous")
        elif "N" in d:
            d["horizon"] = float(d.pop("N"))
            d.setdefault("mode", "discrete")

        aliases = {"K": "k_modes", "r": "fluct_radius", "M": "grid_m",
                   "seed": "master_seed", "snapshots": "n_snapshots"}
        for src, dst in aliases.items():
            if src in d:
                d[dst] = d.pop(src)

        allowed = {"mode", "horizon", "k_modes", "fluct_radius", "grid_m",
                   "n_snapshots", "replicas", "master_seed", "keep_events",
                   "max_events"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        ints = ("k_modes", "grid_m", "n_snapshots", "replicas",
                "master_seed", "max_events")
        for name in ints:
            if name in d:
                d[name] = int(d[name])
        return cls(params=params, sigma_rule=rule, **d)

    def config_hash(self) -> str:
        """Stable short hash identifying the scientific content of the run."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
