"""Pure-Python mirrors of the compiled kernels.

Same entry points and accumulation order as sizedist._kernels, so results
agree to floating-point noise; only the speed differs.  Selected by
sizedist._backend when the extension is unavailable or explicitly disabled.
"""

from __future__ import annotations

import math

import numpy as np

DRIFT_STEXP_IMAGE = 0
DRIFT_MEAN_REVERT = 1
DRIFT_CONSTANT = 2
DRIFT_GAUSS_MIX = 3

_MAX_COMPONENTS = 16


def euler_chain(kind, params, y0, dt, sqrt_a_dt, n_steps, burn_in, thin,
                y_min, reflect, z, out):
    params = np.asarray(params, dtype=float)
    y = float(y0)
    kept = 0
    z_list = np.asarray(z, dtype=float).tolist()

    if kind == DRIFT_GAUSS_MIX:
        m = int(params[0])
        if not 1 <= m <= _MAX_COMPONENTS:
            raise ValueError("mixture drift supports 1..16 components")
        mu = [params[1 + 4 * j] for j in range(m)]
        iv = [params[2 + 4 * j] for j in range(m)]
        lw = [params[3 + 4 * j] for j in range(m)]
        q = [params[4 + 4 * j] for j in range(m)]
    else:
        p0 = float(params[0])
        p1 = float(params[1]) if params.size > 1 else 0.0
        p2 = float(params[2]) if params.size > 2 else 0.0

    for i in range(n_steps):
        if kind == DRIFT_STEXP_IMAGE:
            b = -p0 * math.expm1(p1 * (y - p2))
        elif kind == DRIFT_MEAN_REVERT:
            b = -0.5 * (y - p0)
        elif kind == DRIFT_CONSTANT:
            b = -p0
        else:
            e = [lw[j] - 0.5 * iv[j] * (y - mu[j]) ** 2 for j in range(m)]
            tmax = max(e)
            s = 0.0
            b = 0.0
            for j in range(m):
                tau = math.exp(e[j] - tmax)
                s += tau
                b -= tau * q[j] * (y - mu[j])
            b /= s
        incr = b * dt
        if abs(incr) > 10.0:
            return -(i + 1)
        y = y + incr + sqrt_a_dt * z_list[i]
        if reflect and y < y_min:
            y = 2.0 * y_min - y
        if i >= burn_in and (i - burn_in) % thin == 0:
            out[kept] = y
            kept += 1
    return kept


_HALF_LOG_2PI = 0.9189385332046727


def _estep(y, mu, sigma, w):
    with np.errstate(divide="ignore"):
        lw = np.where(w > 0.0, np.log(np.maximum(w, 1e-300)), -1e308) - np.log(sigma)
    t = lw - 0.5 * ((y[:, None] - mu) / sigma) ** 2
    tmax = t.max(axis=1)
    r = np.exp(t - tmax[:, None])
    s = r.sum(axis=1)
    ll = float(np.sum(tmax + np.log(s))) - y.size * _HALF_LOG_2PI
    r /= s[:, None]
    return ll, r


def em_gauss_mix(y, mu, sigma, w, max_iter, tol, n_consec, sigma_floor):
    y = np.asarray(y, dtype=float)
    n = y.size
    m = mu.shape[0]
    if not 1 <= m <= _MAX_COMPONENTS:
        raise ValueError("EM kernel supports 1..16 components")

    prev = None
    consec = 0
    worst_drop = 0.0
    for it in range(1, max_iter + 1):
        ll, r = _estep(y, mu, sigma, w)
        if prev is not None:
            worst_drop = max(worst_drop, prev - ll)
            consec = consec + 1 if abs(ll - prev) < tol else 0
            if consec >= n_consec:
                return ll, it, 0, worst_drop
        prev = ll

        nj = r.sum(axis=0)
        if np.any(nj < 1e-10):
            return ll, it, 2, worst_drop
        w[:] = nj / n
        mu[:] = (r * y[:, None]).sum(axis=0) / nj
        var = (r * y[:, None] ** 2).sum(axis=0) / nj - mu**2
        if np.any(var <= 0.0):
            return ll, it, 2, worst_drop
        sigma[:] = np.sqrt(var)
        if np.any(sigma < sigma_floor):
            return ll, it, 2, worst_drop

    ll, _ = _estep(y, mu, sigma, w)
    return ll, max_iter, 1, worst_drop
