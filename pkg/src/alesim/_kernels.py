"""Numba kernels for composed slit-map evaluation.

A cluster is stored as parallel arrays (rots, ecs) of per-particle
rotation factors exp(-i*theta) and capacity factors exp(c).  The single
slit map with attachment angle 0 and capacity c sends u to

    F(u) = G(e^c * J(u) + e^c - 1),   J(u) = (u + 1/u)/2,
    G(w) = w + sqrt(w - 1) * sqrt(w + 1),

i.e. the exterior Joukowski transform, an affine stretch of the slot
[-1, 1] onto [-1, 2e^c - 1], and the inverse Joukowski transform.  The
square-root branch (principal on each factor) keeps |F(u)| >= 1 off the
slot and F(u) ~ e^c * u at infinity.

The cluster map applies the newest particle first.  Derivatives are
accumulated in log-magnitude plus unit-phase form so products of 1e4+
factors neither overflow nor lose the phase.
"""

import numba as nb
import numpy as np

# log-derivative sentinel: NaN log-magnitude marks a singular orbit point
_NAN = np.nan


@nb.njit(cache=True)
def eval_point(rots, ecs, n, z):
    """Apply the composed cluster map to a single point."""
    w = z
    for i in range(n - 1, -1, -1):
        rot = rots[i]
        ec = ecs[i]
        u = rot * w
        j = 0.5 * (u + 1.0 / u)
        w2 = ec * j + (ec - 1.0)
        s = np.sqrt(w2 - 1.0) * np.sqrt(w2 + 1.0)
        w = (w2 + s) / rot
    return w


@nb.njit(cache=True)
def eval_point_deriv(rots, ecs, n, z):
    """Apply the cluster map and accumulate its derivative along the orbit.

    Returns (w, logmag, phase): image point, log|Phi'(z)|, and the unit
    complex phase of Phi'(z).  A singular orbit point is signalled by
    logmag = NaN.
    """
    w = z
    logmag = 0.0
    # running product of derivative factors, renormalized only when its
    # squared magnitude leaves [1e-200, 1e200] (factors are near 1)
    pd = 1.0 + 0.0j
    for i in range(n - 1, -1, -1):
        rot = rots[i]
        ec = ecs[i]
        u = rot * w
        inv_u = 1.0 / u
        j = 0.5 * (u + inv_u)
        w2 = ec * j + (ec - 1.0)
        s = np.sqrt(w2 - 1.0) * np.sqrt(w2 + 1.0)
        if s == 0.0:
            return w, _NAN, pd
        fu = w2 + s
        d = ec * 0.5 * (1.0 - inv_u * inv_u) * fu / s
        if d == 0.0:
            return w, _NAN, pd
        pd *= d
        m2 = pd.real * pd.real + pd.imag * pd.imag
        if m2 > 1e200 or m2 < 1e-200:
            am = np.sqrt(m2)
            logmag += np.log(am)
            pd /= am
        w = fu / rot
    am = abs(pd)
    if am == 0.0:
        return w, _NAN, pd
    return w, logmag + np.log(am), pd / am


@nb.njit(cache=True)
def eval_many(rots, ecs, n, zs, out):
    for k in range(zs.shape[0]):
        out[k] = eval_point(rots, ecs, n, zs[k])


@nb.njit(cache=True)
def eval_deriv_many(rots, ecs, n, zs, out_w, out_logmag, out_phase):
    for k in range(zs.shape[0]):
        w, lm, ph = eval_point_deriv(rots, ecs, n, zs[k])
        out_w[k] = w
        out_logmag[k] = lm
        out_phase[k] = ph


@nb.njit(cache=True)
def derivmag_circle(rots, ecs, n, radius, m):
    """|Phi'| on a uniform m-grid of the circle |z| = radius.

    Returns log-magnitudes; grid points that hit a singularity exactly
    come back as NaN and are ignored by the caller.
    """
    out = np.empty(m)
    for k in range(m):
        z = radius * np.exp(1j * (2.0 * np.pi * k / m))
        _, lm, _ = eval_point_deriv(rots, ecs, n, z)
        out[k] = lm
    return out
