"""Deterministic limit objects for the aggregation model.

Time changes tau_t, nu_t and their discrete skeleton, the spectral
multiplier family q(k) with its semigroups, and exact covariance /
transition oracles for the limiting Ornstein-Uhlenbeck mode processes.

Conventions.  The complex driving noise satisfies E|B_t(k)|^2 = 2t
(independent real and imaginary parts of variance t each), and the
mode-k decay rate is kappa = 1 + (1 - zeta) k.  With those fixed,

    Var Gamma_t(k)   = 4 int_0^t e^{-2 kappa (tau_t - tau_s)}
                                 e^{-(2 alpha + eta) tau_s} ds,
    Var Gamma^cap_t  =   int_0^t e^{-2 zeta (tau_t - tau_s)}
                                 e^{-(2 alpha + eta) tau_s} ds.

All quadrature is done after substituting x = tau_s (ds = e^{zeta x} dx),
which removes the endpoint singularity at the blow-up horizon when
zeta < 0 and reduces every integrand to e^{-rate (X - x)} e^{-alpha x}.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, DomainError

# branch-switch threshold for the degenerate parameter values
_EPS = 1e-12


# -- time changes ---------------------------------------------------------

def t_crit(zeta: float) -> float:
    """Blow-up horizon of the continuous-time parameterization."""
    if zeta < -_EPS:
        return 1.0 / abs(zeta)
    return math.inf


def tau(t: float, zeta: float) -> float:
    """tau_t = zeta^{-1} log(1 + zeta t), with the zeta = 0 branch t."""
    if t < 0 or t >= t_crit(zeta):
        raise DomainError(f"time {t} outside [0, t_crit) for zeta={zeta}")
    if abs(zeta) < _EPS:
        return t
    return math.log1p(zeta * t) / zeta


def tau_inv(x: float, zeta: float) -> float:
    """Inverse time change: the t with tau_t = x."""
    if x < 0:
        raise DomainError("tau must be nonnegative")
    if abs(zeta) < _EPS:
        return x
    return math.expm1(zeta * x) / zeta


def n_crit(alpha: float) -> float:
    """Blow-up horizon of the particle-count parameterization (in cn units)."""
    if alpha < -_EPS:
        return 1.0 / abs(alpha)
    return math.inf


def tau_disc(n: float, alpha: float, c: float) -> float:
    """Discrete-skeleton capacity limit alpha^{-1} log(1 + alpha c n)."""
    if n < 0 or c * n >= n_crit(alpha):
        raise DomainError(f"step count {n} outside range for alpha={alpha}")
    if abs(alpha) < _EPS:
        return c * n
    return math.log1p(alpha * c * n) / alpha


def nu(t: float, alpha: float, zeta: float) -> float:
    """nu_t = int_0^t e^{-eta tau_s} ds, in closed form with all branches."""
    if t < 0 or t >= t_crit(zeta):
        raise DomainError(f"time {t} outside [0, t_crit) for zeta={zeta}")
    if abs(alpha) < _EPS:
        return tau(t, zeta)
    if abs(zeta) < _EPS:
        return math.expm1(alpha * t) / alpha
    if abs(alpha - zeta) < _EPS:
        return t
    return math.expm1((alpha / zeta) * math.log1p(zeta * t)) / alpha


@dataclass(frozen=True)
class TimeChange:
    """Bundled time changes for one parameter point (zeta = alpha + eta)."""

    alpha: float
    eta: float

    @property
    def zeta(self) -> float:
        return self.alpha + self.eta

    @property
    def t_crit(self) -> float:
        return t_crit(self.zeta)

    @property
    def n_crit(self) -> float:
        return n_crit(self.alpha)

    def tau(self, t: float) -> float:
        return tau(t, self.zeta)

    def nu(self, t: float) -> float:
        return nu(t, self.alpha, self.zeta)

    def tau_disc(self, n: float, c: float) -> float:
        return tau_disc(n, self.alpha, c)


# -- multiplier operators --------------------------------------------------

class Variant(enum.Enum):
    Q = "Q"
    Q0 = "Q0"
    Q1 = "Q1"
    QTILDE0 = "Qtilde0"
    QTILDE1 = "Qtilde1"


def multiplier_q(k: int, zeta: float, sigma: float,
                 variant: Variant = Variant.Q) -> float:
    """Spectral multiplier of the chosen operator at Laurent mode k.

    q(k) = k (1 - zeta e^{-sigma(k+1)}) splits as q0 + q1 for zeta >= 0
    and as qtilde0 + qtilde1 for zeta < 0.
    """
    if k < -1:
        raise ConfigError("modes below k = -1 are undefined")
    if variant == Variant.Q:
        return k * (1.0 - zeta * math.exp(-sigma * (k + 1)))
    if variant == Variant.Q0:
        return (1.0 - zeta) * k
    if variant == Variant.Q1:
        return zeta * k * -math.expm1(-sigma * (k + 1))
    if variant == Variant.QTILDE0:
        return float(k)
    if variant == Variant.QTILDE1:
        return abs(zeta) * k * math.exp(-sigma * (k + 1))
    raise ConfigError(f"unknown multiplier variant {variant!r}")


@dataclass(frozen=True)
class MultiplierOperator:
    """Diagonal operator on Laurent coefficients, one multiplier per mode."""

    zeta: float
    sigma: float
    variant: Variant = Variant.Q

    def q(self, k: int) -> float:
        return multiplier_q(k, self.zeta, self.sigma, self.variant)

    def spectrum(self, K: int) -> np.ndarray:
        return np.array([self.q(k) for k in range(K + 1)])


_SEMIGROUP_BASE = {"P": Variant.Q, "P0": Variant.Q0, "P1": Variant.Q1}


def apply_semigroup(series, delta: float, zeta: float, sigma: float,
                    variant: str = "P"):
    """P(delta) = e^{-delta Q} acting diagonally on a LaurentSeries."""
    if delta < 0:
        raise ConfigError("semigroup time must be nonnegative")
    try:
        base = _SEMIGROUP_BASE[variant]
    except KeyError:
        raise ConfigError(f"unknown semigroup variant {variant!r}") from None
    from .conformal import LaurentSeries
    ks = np.arange(series.coeffs.shape[0])
    qs = np.array([multiplier_q(int(k), zeta, sigma, base) for k in ks])
    return LaurentSeries(radius=series.radius,
                         coeffs=series.coeffs * np.exp(-delta * qs),
                         aliasing_tol=series.aliasing_tol)


# -- covariance oracles ----------------------------------------------------

def _kernel_integral(rate: float, alpha: float, x_lo: float,
                     x_hi: float) -> float:
    """int_{x_lo}^{x_hi} e^{-rate (x_hi - x)} e^{-alpha x} dx by adaptive
    quadrature (the tau-substituted form shared by every flavor)."""
    if x_hi <= x_lo:
        return 0.0
    val, _ = quad(lambda x: math.exp(-rate * (x_hi - x) - alpha * x),
                  x_lo, x_hi, epsabs=1e-14, epsrel=1e-11, limit=200)
    return val


def mode_rate(k: int, zeta: float) -> float:
    """OU decay rate kappa = 1 + (1 - zeta) k of mode k."""
    return 1.0 + (1.0 - zeta) * k


def ou_covariance(k: int, t: float, params, flavor: str = "mode") -> float:
    """Exact variance of the limit fluctuation at time t.

    flavor "mode": Var Gamma_t(k) (complex, both components together);
    flavor "cap": Var Gamma^cap_t; flavor "disc": Var of the discrete
    skeleton mode at nu-time t (here t is interpreted as nu).
    """
    alpha, eta = params.alpha, params.eta
    zeta = alpha + eta
    if flavor == "mode":
        x_hi = tau(t, zeta)
        return 4.0 * _kernel_integral(2.0 * mode_rate(k, zeta), alpha,
                                      0.0, x_hi)
    if flavor == "cap":
        x_hi = tau(t, zeta)
        return _kernel_integral(2.0 * zeta, alpha, 0.0, x_hi)
    if flavor == "disc":
        # nu-time SDE: decay (1 + q0(k)) in a_nu = alpha^{-1} log(1+alpha nu),
        # noise weight (1 + alpha s)^{-2} ds; substituting x = a_s gives the
        # same kernel as the mode flavor with horizon a_nu.
        if t < 0 or alpha * t <= -1.0:
            raise DomainError(f"nu {t} outside range for alpha={alpha}")
        a_hi = t if abs(alpha) < _EPS else math.log1p(alpha * t) / alpha
        return 4.0 * _kernel_integral(2.0 * mode_rate(k, zeta), alpha,
                                      0.0, a_hi)
    raise ConfigError(f"unknown covariance flavor {flavor!r}")


def prm_mode_variance(k: int, t: float, params) -> float:
    """Second moment of the rescaled Poisson integral mode,
    Var(c^{-1/2} Pi_t(k)) = 4 int_0^t e^{-2(1+q(k))(tau_t - tau_s)}
    e^{-(2 alpha + eta) tau_s} ds, with the sigma-aware multiplier q.

    At sigma = 0 the multiplier collapses to (1 - zeta) k and this equals
    ou_covariance(..., "mode") — the normalization anchor.
    """
    alpha, eta = params.alpha, params.eta
    zeta = alpha + eta
    qk = multiplier_q(k, zeta, getattr(params, "sigma", 0.0), Variant.Q)
    x_hi = tau(t, zeta)
    return 4.0 * _kernel_integral(2.0 * (1.0 + qk), alpha, 0.0, x_hi)


def prm_cap_variance(t: float, params) -> float:
    """Var(c^{-1/2} Pi^cap_t); identical to the cap-flavor OU variance."""
    return ou_covariance(0, t, params, flavor="cap")


# -- exact-transition simulation ------------------------------------------

def simulate_limit_modes(K: int, times, params, rng: np.random.Generator):
    """Sample one path of (Gamma(0..K), Gamma^cap) on the given time grid.

    Transitions are exact: over [t, t+h] mode k decays by
    e^{-kappa (tau_{t+h} - tau_t)} and gains a centered complex Gaussian of
    total variance 4 int_t^{t+h} e^{-2 kappa (tau_{t+h}-tau_s)}
    e^{-(2 alpha + eta) tau_s} ds (half per component); the cap process is
    real with decay e^{-zeta d tau} and the analogous variance.  There is
    no discretization bias.  Gamma_0 = 0.
    """
    alpha, eta = params.alpha, params.eta
    zeta = alpha + eta
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0) or ts[0] < 0:
        raise ConfigError("time grid must be strictly increasing and >= 0")
    if ts[-1] >= t_crit(zeta):
        raise DomainError("time grid exceeds the blow-up horizon")

    kappas = np.array([mode_rate(k, zeta) for k in range(K + 1)])
    modes = np.zeros((ts.size, K + 1), dtype=np.complex128)
    cap = np.zeros(ts.size)

    x_prev = 0.0
    g_modes = np.zeros(K + 1, dtype=np.complex128)
    g_cap = 0.0
    for i, t in enumerate(ts):
        x = tau(t, zeta)
        if x > x_prev:
            for k in range(K + 1):
                v = 4.0 * _kernel_integral(2.0 * kappas[k], alpha, x_prev, x)
                noise = rng.normal(scale=math.sqrt(0.5 * v), size=2)
                g_modes[k] = (g_modes[k] * math.exp(-kappas[k] * (x - x_prev))
                              + noise[0] + 1j * noise[1])
            v_cap = _kernel_integral(2.0 * zeta, alpha, x_prev, x)
            g_cap = (g_cap * math.exp(-zeta * (x - x_prev))
                     + rng.normal(scale=math.sqrt(v_cap)))
            x_prev = x
        modes[i] = g_modes
        cap[i] = g_cap
    return modes, cap


@dataclass(frozen=True)
class LimitOracle:
    """Covariances and exact samplers of the Gaussian limit processes."""

    params: object  # anything exposing alpha, eta (and sigma for PRM forms)

    def variance(self, k: int, t: float, flavor: str = "mode") -> float:
        return ou_covariance(k, t, self.params, flavor=flavor)

    def prm_variance(self, k: int, t: float) -> float:
        return prm_mode_variance(k, t, self.params)

    def sample_paths(self, K: int, times, n_paths: int,
                     rng: np.random.Generator):
        """Stacked independent paths: (n_paths, n_times, K+1) and
        (n_paths, n_times)."""
        ts = np.asarray(times, dtype=float)
        modes = np.empty((n_paths, ts.size, K + 1), dtype=np.complex128)
        cap = np.empty((n_paths, ts.size))
        for p in range(n_paths):
            modes[p], cap[p] = simulate_limit_modes(K, ts, self.params, rng)
        return modes, cap
