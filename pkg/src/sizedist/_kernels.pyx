# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled hot loops: Euler-Maruyama chain stepping and the Gaussian-mixture
EM sweep.  sizedist._kernels_py mirrors both entry points in pure Python with
the same accumulation order; sizedist._backend picks whichever imports."""

from libc.math cimport exp, expm1, fabs, log, sqrt

DRIFT_STEXP_IMAGE = 0
DRIFT_MEAN_REVERT = 1
DRIFT_CONSTANT = 2
DRIFT_GAUSS_MIX = 3

DEF MAX_COMPONENTS = 16


def euler_chain(int kind, const double[::1] params, double y0, double dt,
                double sqrt_a_dt, long n_steps, long burn_in, long thin,
                double y_min, bint reflect, const double[::1] z, double[::1] out):
    """Advance y by Euler steps, writing every `thin`-th post-burn-in state
    into `out`.  Returns the retained count, or -(i+1) if the drift increment
    at step i exceeded the stability guard |b*dt| > 10."""
    cdef long i, j, kept = 0
    cdef long m = 0
    cdef double y = y0, b, incr, d, t, tmax, s, tau
    cdef double mu_j[MAX_COMPONENTS]
    cdef double iv_j[MAX_COMPONENTS]
    cdef double lw_j[MAX_COMPONENTS]
    cdef double q_j[MAX_COMPONENTS]
    cdef double e_j[MAX_COMPONENTS]

    if kind == DRIFT_GAUSS_MIX:
        m = <long> params[0]
        if m < 1 or m > MAX_COMPONENTS:
            raise ValueError("mixture drift supports 1..16 components")
        for j in range(m):
            mu_j[j] = params[1 + 4 * j]
            iv_j[j] = params[2 + 4 * j]
            lw_j[j] = params[3 + 4 * j]
            q_j[j] = params[4 + 4 * j]

    for i in range(n_steps):
        if kind == DRIFT_STEXP_IMAGE:
            b = -params[0] * expm1(params[1] * (y - params[2]))
        elif kind == DRIFT_MEAN_REVERT:
            b = -0.5 * (y - params[0])
        elif kind == DRIFT_CONSTANT:
            b = -params[0]
        else:
            tmax = -1e308
            for j in range(m):
                d = y - mu_j[j]
                e_j[j] = lw_j[j] - 0.5 * iv_j[j] * d * d
                if e_j[j] > tmax:
                    tmax = e_j[j]
            s = 0.0
            b = 0.0
            for j in range(m):
                tau = exp(e_j[j] - tmax)
                s += tau
                b -= tau * q_j[j] * (y - mu_j[j])
            b /= s
        incr = b * dt
        if fabs(incr) > 10.0:
            return -(i + 1)
        y = y + incr + sqrt_a_dt * z[i]
        if reflect and y < y_min:
            y = 2.0 * y_min - y
        if i >= burn_in and (i - burn_in) % thin == 0:
            out[kept] = y
            kept += 1
    return kept


def em_gauss_mix(const double[::1] y, double[::1] mu, double[::1] sigma,
                 double[::1] w, long max_iter, double tol, int n_consec,
                 double sigma_floor):
    """One EM run on log data.  mu/sigma/w are updated in place.

    Returns (loglik, iterations, status, worst_drop) where status is
    0 = converged, 1 = iteration cap, 2 = degenerate component; loglik is the
    log-space value at the returned parameters and worst_drop the largest
    per-iteration decrease observed (ascent violations should be ~0)."""
    cdef long n = y.shape[0]
    cdef long m = mu.shape[0]
    cdef long i, it
    cdef int j, consec = 0
    cdef double ll, prev = 0.0, tmax, s, tau, d, var, drop, worst_drop = 0.0
    cdef double half_log_2pi = 0.9189385332046727
    cdef bint have_prev = False
    cdef double lw[MAX_COMPONENTS]
    cdef double iv[MAX_COMPONENTS]
    cdef double t[MAX_COMPONENTS]
    cdef double nj[MAX_COMPONENTS]
    cdef double s1[MAX_COMPONENTS]
    cdef double s2[MAX_COMPONENTS]

    if m < 1 or m > MAX_COMPONENTS:
        raise ValueError("EM kernel supports 1..16 components")

    for it in range(1, max_iter + 1):
        for j in range(m):
            lw[j] = (log(w[j]) if w[j] > 0.0 else -1e308) - log(sigma[j])
            iv[j] = 1.0 / (sigma[j] * sigma[j])
            nj[j] = 0.0
            s1[j] = 0.0
            s2[j] = 0.0
        ll = 0.0
        for i in range(n):
            tmax = -1e308
            for j in range(m):
                d = y[i] - mu[j]
                t[j] = lw[j] - 0.5 * iv[j] * d * d
                if t[j] > tmax:
                    tmax = t[j]
            s = 0.0
            for j in range(m):
                t[j] = exp(t[j] - tmax)
                s += t[j]
            ll += tmax + log(s)
            for j in range(m):
                tau = t[j] / s
                nj[j] += tau
                s1[j] += tau * y[i]
                s2[j] += tau * y[i] * y[i]
        ll -= n * half_log_2pi

        if have_prev:
            drop = prev - ll
            if drop > worst_drop:
                worst_drop = drop
            if fabs(ll - prev) < tol:
                consec += 1
            else:
                consec = 0
            if consec >= n_consec:
                return ll, it, 0, worst_drop
        prev = ll
        have_prev = True

        for j in range(m):
            if nj[j] < 1e-10:
                return ll, it, 2, worst_drop
            w[j] = nj[j] / n
            mu[j] = s1[j] / nj[j]
            var = s2[j] / nj[j] - mu[j] * mu[j]
            if var <= 0.0:
                return ll, it, 2, worst_drop
            sigma[j] = sqrt(var)
            if sigma[j] < sigma_floor:
                return ll, it, 2, worst_drop

    # iteration cap: re-evaluate the likelihood at the final parameters
    for j in range(m):
        lw[j] = (log(w[j]) if w[j] > 0.0 else -1e308) - log(sigma[j])
        iv[j] = 1.0 / (sigma[j] * sigma[j])
    ll = 0.0
    for i in range(n):
        tmax = -1e308
        for j in range(m):
            d = y[i] - mu[j]
            t[j] = lw[j] - 0.5 * iv[j] * d * d
            if t[j] > tmax:
                tmax = t[j]
        s = 0.0
        for j in range(m):
            s += exp(t[j] - tmax)
        ll += tmax + log(s)
    ll -= n * half_log_2pi
    return ll, max_iter, 1, worst_drop
