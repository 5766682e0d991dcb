"""Single-particle slit maps and their composition into cluster maps.

The slit particle of capacity c is the radial segment (1, 1+delta(c)]
attached to the unit circle.  Its exterior conformal map has the closed
form F(z) = G(e^c J(z) + e^c - 1) with J the Joukowski transform and
G its inverse (see _kernels); this is exactly the time-c flow of the
exterior Loewner equation driven by a point mass at angle 0.  The
capacity/height relation is e^c = (2 + delta)^2 / (4 (1 + delta)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError, SingularityError

MAX_PARTICLE_CAPACITY = 1.0


class Family(enum.Enum):
    SLIT = "slit"


def slit_height(c: float) -> float:
    """Height delta(c) of the slit particle of capacity c."""
    u = math.expm1(c)  # e^c - 1
    return 2.0 * u + 2.0 * math.sqrt(u * u + u)


def capacity_for_height(delta: float, tol: float = 1e-10) -> float:
    """Calibrate capacity from slit height by bisection on slit_height."""
    if delta <= 0:
        raise ConfigError("slit height must be positive")
    lo, hi = 0.0, MAX_PARTICLE_CAPACITY
    if slit_height(hi) < delta:
        raise ConfigError("slit height out of supported range")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if slit_height(mid) < delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_exterior(z: complex) -> None:
    if abs(z) <= 1.0:
        raise DomainError(f"point {z} is not in the exterior disk")


@dataclass(frozen=True)
class ParticleMap:
    """One attached particle: capacity, attachment angle and slit height."""

    capacity: float
    angle: float
    family: Family = Family.SLIT
    shape: float = 0.0  # slit height delta(c)

    def eval(self, z: complex) -> complex:
        _check_exterior(z)
        rots = np.array([np.exp(-1j * self.angle)])
        ecs = np.array([math.exp(self.capacity)])
        return complex(_kernels.eval_point(rots, ecs, 1, complex(z)))

    def deriv(self, z: complex) -> complex:
        _check_exterior(z)
        rots = np.array([np.exp(-1j * self.angle)])
        ecs = np.array([math.exp(self.capacity)])
        _, logmag, phase = _kernels.eval_point_deriv(rots, ecs, 1, complex(z))
        if not np.isfinite(logmag):
            raise SingularityError(f"derivative singular at {z}")
        return complex(math.exp(logmag) * phase)


def build_slit_map(c: float, theta: float = 0.0) -> ParticleMap:
    """Slit particle map of capacity c attached at angle theta."""
    if not c > 0:
        raise ConfigError("capacity must be positive")
    if c > MAX_PARTICLE_CAPACITY:
        raise ConfigError(f"capacity {c} out of supported range (c <= 1)")
    return ParticleMap(capacity=float(c), angle=float(theta) % (2 * math.pi),
                       shape=slit_height(c))


def particle_eval(p: ParticleMap, z: complex) -> complex:
    return p.eval(z)


def particle_deriv(p: ParticleMap, z: complex) -> complex:
    return p.deriv(z)


class _Buffer:
    """Append-only particle storage shared by a chain of ClusterMap views."""

    __slots__ = ("thetas", "rots", "ecs", "caps", "n")

    def __init__(self, capacity: int = 64):
        self.thetas = np.empty(capacity)
        self.rots = np.empty(capacity, dtype=np.complex128)
        self.ecs = np.empty(capacity)
        self.caps = np.empty(capacity)
        self.n = 0

    def append(self, c: float, theta: float) -> int:
        if self.n == self.thetas.shape[0]:
            for name in ("thetas", "rots", "ecs", "caps"):
                arr = getattr(self, name)
                new = np.empty(2 * arr.shape[0], dtype=arr.dtype)
                new[: self.n] = arr[: self.n]
                setattr(self, name, new)
        i = self.n
        self.thetas[i] = theta
        self.rots[i] = np.exp(-1j * theta)
        self.ecs[i] = math.exp(c)
        self.caps[i] = c
        self.n = i + 1
        return self.n

    def copy_prefix(self, n: int) -> "_Buffer":
        out = _Buffer(max(64, 2 * n))
        out.thetas[:n] = self.thetas[:n]
        out.rots[:n] = self.rots[:n]
        out.ecs[:n] = self.ecs[:n]
        out.caps[:n] = self.caps[:n]
        out.n = n
        return out


@dataclass(frozen=True)
class ClusterMap:
    """Ordered composition of slit maps; immutable view into a shared buffer.

    Appending returns a new ClusterMap.  The newest particle acts first:
    Phi = F_1 o ... o F_n with particle index 0 the oldest.
    """

    _buffer: _Buffer = field(default_factory=_Buffer, repr=False)
    n_particles: int = 0
    total_capacity: float = 0.0

    def append(self, c: float, theta: float) -> "ClusterMap":
        buf = self._buffer
        if buf.n != self.n_particles:
            buf = buf.copy_prefix(self.n_particles)  # branched history
        buf.append(c, theta % (2 * math.pi))
        return ClusterMap(buf, self.n_particles + 1, self.total_capacity + c)

    @property
    def capacities(self) -> np.ndarray:
        return self._buffer.caps[: self.n_particles]

    @property
    def angles(self) -> np.ndarray:
        return self._buffer.thetas[: self.n_particles]

    def prefix(self, n: int) -> "ClusterMap":
        """The cluster after its first n particles (a cheap view)."""
        if n > self.n_particles:
            raise ConfigError("prefix longer than cluster")
        return ClusterMap(self._buffer, n, float(np.sum(self._buffer.caps[:n])))

    # -- evaluation ------------------------------------------------------

    def apply(self, z):
        """Phi(z) for a scalar or array of exterior points."""
        buf = self._buffer
        if np.isscalar(z) or isinstance(z, complex):
            _check_exterior(z)
            return complex(_kernels.eval_point(buf.rots, buf.ecs,
                                               self.n_particles, complex(z)))
        zs = np.asarray(z, dtype=np.complex128)
        if np.any(np.abs(zs) <= 1.0):
            raise DomainError("all points must lie in the exterior disk")
        out = np.empty_like(zs)
        _kernels.eval_many(buf.rots, buf.ecs, self.n_particles, zs.ravel(),
                           out.ravel())
        return out

    def deriv_parts(self, z: complex):
        """(Phi(z), log|Phi'(z)|, unit phase of Phi'(z))."""
        _check_exterior(z)
        buf = self._buffer
        w, logmag, phase = _kernels.eval_point_deriv(
            buf.rots, buf.ecs, self.n_particles, complex(z))
        if not np.isfinite(logmag):
            raise SingularityError(f"cluster derivative singular at {z}")
        return complex(w), float(logmag), complex(phase)

    def deriv(self, z: complex) -> complex:
        _, logmag, phase = self.deriv_parts(z)
        return math.exp(logmag) * phase

    def deriv_mag(self, z: complex) -> float:
        """|Phi'(z)|, computed in log space."""
        _, logmag, _ = self.deriv_parts(z)
        return math.exp(logmag)

    def deriv_logmag_circle(self, radius: float, m: int) -> np.ndarray:
        """log|Phi'| on a uniform m-grid of |z| = radius (NaN if singular)."""
        buf = self._buffer
        return _kernels.derivmag_circle(buf.rots, buf.ecs, self.n_particles,
                                        radius, m)


def cluster_apply(cluster: ClusterMap, z):
    return cluster.apply(z)


def cluster_deriv(cluster: ClusterMap, z: complex) -> complex:
    return cluster.deriv(z)


def schlicht_residual(cluster: ClusterMap, z) -> complex:
    """e^{-cap} Phi(z) - z, the deviation of the normalized map from identity."""
    return math.exp(-cluster.total_capacity) * cluster.apply(z) - z


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated Laurent coefficients of a function holomorphic outside
    the unit disk and bounded at infinity, extracted on |z| = radius."""

    radius: float
    coeffs: np.ndarray  # complex, index k = 0..K
    aliasing_tol: float = 0.0

    def eval(self, z):
        zs = np.asarray(z, dtype=np.complex128)
        k = np.arange(self.coeffs.shape[0])
        return np.sum(self.coeffs[:, None] * zs.ravel()[None, :] ** (-k[:, None]),
                      axis=0).reshape(zs.shape)


def laurent_coeffs(cluster: ClusterMap, r: float = 1.5, K: int = 32,
                   M: int = 512) -> LaurentSeries:
    """Laurent modes of the Schlicht residual by FFT on |z| = r.

    coeffs[k] = (1/M) sum_j residual(r e^{i theta_j}) r^k e^{i k theta_j}.
    """
    if M < 4 * K or M & (M - 1) != 0:
        raise ConfigError("sample count must be a power of two with M >= 4K")
    if not r > 1.0:
        raise ConfigError("extraction radius must exceed 1")
    theta = 2.0 * np.pi * np.arange(M) / M
    zs = r * np.exp(1j * theta)
    vals = schlicht_residual(cluster, zs)
    modes = np.fft.ifft(vals)[: K + 1] * r ** np.arange(K + 1)
    tol = r ** (-(M - K)) * (r / (r - 1.0))
    return LaurentSeries(radius=r, coeffs=modes, aliasing_tol=tol)


def boundary_trace(cluster: ClusterMap, M: int = 1024,
                   rho: float = 1.0 + 1e-6) -> np.ndarray:
    """Image of the circle |z| = rho, a polyline tracing the cluster boundary."""
    if rho < 1.0 + 1e-8:
        raise ConfigError("trace radius must be at least 1 + 1e-8")
    if M < 16:
        raise ConfigError("trace needs at least 16 samples")
    theta = 2.0 * np.pi * np.arange(M) / M
    return cluster.apply(rho * np.exp(1j * theta))
