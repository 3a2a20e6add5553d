"""Maximum-likelihood fitting for the size-distribution families.

All reported log-likelihoods are size-space values (they include the
Jacobian of the log transform), so they are directly comparable across
families and usable for information criteria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import log_ndtr, logsumexp

from ._backend import kernels
from .errors import (
    DegenerateMixtureError,
    DegenerateSampleError,
    InsufficientDataError,
    OptimizerError,
    SupportError,
)
from .models import (
    Lognormal,
    LognormalMixture,
    Pareto,
    StretchedExponential,
    TruncatedLognormal,
)
from .sample import Sample

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


@dataclass
class FitDiagnostics:
    iterations: int = 0
    converged: bool = True
    grad_norm: Optional[float] = None
    em_restarts_used: Optional[int] = None
    em_degenerate_runs: int = 0
    boundary_fit: bool = False
    ridge_suspected: bool = False


@dataclass
class FitResult:
    model: object
    log_likelihood: float
    k: int
    n: int
    std_errors: Optional[np.ndarray]
    diagnostics: FitDiagnostics = field(default_factory=FitDiagnostics)


def _as_sample(data) -> Sample:
    return data if isinstance(data, Sample) else Sample.from_values(data)


def log_likelihood(model, data) -> float:
    """Sum of model.log_pdf over the data (size space).

    Raises SupportError when any observation falls outside the model support.
    """
    sample = _as_sample(data)
    return float(np.sum(model.log_pdf(sample.values)))


def _fd_steps(theta: np.ndarray) -> np.ndarray:
    return np.maximum(1e-5, 1e-4 * np.abs(theta))


def scaled_grad_norm(model, data) -> Optional[float]:
    """Max abs per-observation score component, by central differences."""
    sample = _as_sample(data)
    theta = model.free_parameters()
    h = _fd_steps(theta)
    g = np.empty_like(theta)
    try:
        for i in range(theta.size):
            up = theta.copy()
            dn = theta.copy()
            up[i] += h[i]
            dn[i] -= h[i]
            g[i] = (
                log_likelihood(model.with_parameters(up), sample)
                - log_likelihood(model.with_parameters(dn), sample)
            ) / (2.0 * h[i])
    except (ValueError, SupportError):
        return None
    return float(np.max(np.abs(g))) / sample.n


def observed_information(model, data) -> np.ndarray:
    """Negative Hessian of the log-likelihood at the model's parameters."""
    sample = _as_sample(data)
    theta = model.free_parameters()
    p = theta.size
    h = _fd_steps(theta)

    def f(t):
        return log_likelihood(model.with_parameters(t), sample)

    f0 = f(theta)
    hess = np.empty((p, p))
    for i in range(p):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h[i]
        dn[i] -= h[i]
        hess[i, i] = (f(up) - 2.0 * f0 + f(dn)) / (h[i] * h[i])
    for i in range(p):
        for j in range(i + 1, p):
            pp = theta.copy()
            pm = theta.copy()
            mp = theta.copy()
            mm = theta.copy()
            pp[[i, j]] += [h[i], h[j]]
            pm[i] += h[i]
            pm[j] -= h[j]
            mp[i] -= h[i]
            mp[j] += h[j]
            mm[[i, j]] -= [h[i], h[j]]
            hess[i, j] = hess[j, i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j])
    return -hess


def standard_errors(model, data) -> Optional[np.ndarray]:
    """Observed-information standard errors; None when the information
    matrix is unusable (singular, non-positive, or evaluation failed)."""
    try:
        info = observed_information(model, data)
        cov = np.linalg.inv(info)
    except (ValueError, SupportError, np.linalg.LinAlgError):
        return None
    diag = np.diag(cov)
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0.0):
        return None
    return np.sqrt(diag)


# ---------------------------------------------------------------------------
# lognormal
# ---------------------------------------------------------------------------


def fit_lognormal(sample: Sample) -> FitResult:
    """Closed-form ML fit; sigma uses the divisor-n estimator."""
    sample = _as_sample(sample)
    n = sample.n
    if n < 2:
        raise InsufficientDataError("lognormal fit needs at least 2 observations")
    y = sample.logs
    mu = float(np.mean(y))
    sq = float(np.mean((y - mu) ** 2))
    if sq <= 0.0:
        raise DegenerateSampleError("all log-sizes identical; lognormal fit undefined")
    sigma = np.sqrt(sq)
    lnl = -n * (np.log(sigma) + _HALF_LOG_2PI + 0.5 + mu)
    se = np.array([sigma / np.sqrt(n), sigma / np.sqrt(2.0 * n)])
    diag = FitDiagnostics(iterations=0, converged=True, grad_norm=0.0)
    return FitResult(Lognormal(mu, sigma), float(lnl), 2, n, se, diag)


# ---------------------------------------------------------------------------
# stretched exponential
# ---------------------------------------------------------------------------


def _stexp_profile(gamma: float, y: np.ndarray, sum_y: float, n: int) -> float:
    # log-likelihood with the scale profiled out at eta-hat(gamma)
    log_mean = logsumexp(gamma * y) - np.log(n)
    return n * np.log(gamma) + (gamma - 1.0) * sum_y - n * log_mean - n


def fit_stexp(sample: Sample, grid_size: int = 33) -> FitResult:
    """Profile-likelihood fit with shape constrained to (0, 1).

    A coarse grid brackets the optimum; bounded scalar minimization refines
    it to 1e-8.  Shapes pinned near either end are flagged as boundary fits.
    """
    sample = _as_sample(sample)
    n = sample.n
    if n < 2:
        raise InsufficientDataError("stretched-exponential fit needs at least 2 observations")
    y = sample.logs
    if np.ptp(y) == 0.0:
        raise DegenerateSampleError("all log-sizes identical; shape is unidentified")
    sum_y = float(np.sum(y))

    lo, hi = 1e-4, 1.0 - 1e-7
    grid = np.linspace(0.02, 0.98, grid_size)
    vals = np.array([_stexp_profile(g, y, sum_y, n) for g in grid])
    i = int(np.argmax(vals))
    b_lo = grid[i - 1] if i > 0 else lo
    b_hi = grid[i + 1] if i < grid_size - 1 else hi

    res = minimize_scalar(
        lambda g: -_stexp_profile(g, y, sum_y, n),
        bounds=(b_lo, b_hi),
        method="bounded",
        options={"xatol": 1e-8},
    )
    gamma = float(res.x)
    eta = float(np.exp((logsumexp(gamma * y) - np.log(n)) / gamma))
    model = StretchedExponential(gamma, eta)
    lnl = float(-res.fun)
    diag = FitDiagnostics(
        iterations=int(res.nfev),
        converged=bool(res.success),
        boundary_fit=bool(gamma < 5e-3 or gamma > 0.99),
    )
    diag.grad_norm = scaled_grad_norm(model, sample)
    return FitResult(model, lnl, 2, n, standard_errors(model, sample), diag)


# ---------------------------------------------------------------------------
# lognormal mixtures
# ---------------------------------------------------------------------------


def _em_run(y, mu0, sigma0, w0, max_iter, tol, consec, sigma_floor):
    mu = np.array(mu0, dtype=float)
    sigma = np.array(sigma0, dtype=float)
    w = np.array(w0, dtype=float)
    ll, iters, status, worst = kernels.em_gauss_mix(
        y, mu, sigma, w, max_iter, tol, consec, sigma_floor
    )
    return ll, mu, sigma, w, iters, status, worst


def _moment_init(y, resp, sigma_floor):
    nj = resp.sum(axis=0)
    nj = np.maximum(nj, 1e-12)
    w = nj / resp.shape[0]
    mu = resp.T @ y / nj
    var = resp.T @ (y * y) / nj - mu**2
    sigma = np.sqrt(np.maximum(var, (2.0 * sigma_floor) ** 2))
    return mu, sigma, w


def _quantile_split_init(y, m, sigma_floor):
    blocks = np.array_split(y, m)  # y arrives sorted
    mu = np.array([b.mean() for b in blocks])
    sigma = np.array([max(b.std(), 2.0 * sigma_floor) for b in blocks])
    w = np.full(m, 1.0 / m)
    return mu, sigma, w


def fit_mixture(
    sample: Sample,
    m: int,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = 2000,
    tol: float = 1e-8,
    consec: int = 3,
    full_starts: bool = True,
    compute_se: bool = True,
) -> FitResult:
    """EM fit of an m-component lognormal mixture on the log data.

    Runs `restarts` random initializations (Dirichlet responsibilities) plus
    deterministic starts: an equal-count quantile split, m identical copies
    of the single-lognormal solution (which pins the fit at or above the
    plain lognormal likelihood), and for m = 3 a split of a quick
    two-component fit.  Collapsed components (sigma below 1e-3 of the log-sd)
    abort a run; the best surviving run wins, ties going to the earliest
    start.  Components are reported in decreasing-mean order.
    """
    sample = _as_sample(sample)
    n = sample.n
    if m < 2:
        raise ValueError("mixture fit needs m >= 2")
    if n < 10 * m:
        raise InsufficientDataError(f"mixture fit needs at least {10 * m} observations")
    y = sample.logs
    log_sd = float(np.std(y))
    if log_sd == 0.0:
        raise DegenerateSampleError("all log-sizes identical; mixture fit undefined")
    sigma_floor = 1e-3 * log_sd

    starts = []
    for r in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, m, r)))
        resp = rng.dirichlet(np.ones(m), size=n)
        starts.append(_moment_init(y, resp, sigma_floor))
    starts.append(_quantile_split_init(y, m, sigma_floor))
    if full_starts:
        mu_hat = float(np.mean(y))
        starts.append((np.full(m, mu_hat), np.full(m, log_sd), np.full(m, 1.0 / m)))
        if m == 3:
            quick = fit_mixture(
                sample, 2, restarts=0, seed=seed, max_iter=max_iter, tol=tol,
                consec=consec, full_starts=True, compute_se=False,
            ).model
            p2 = quick.probs
            j = int(np.argmax(p2))
            mu0 = [quick.mu[0], quick.mu[1], quick.mu[j]]
            s0 = [quick.sigma[0], quick.sigma[1], quick.sigma[j]]
            w0 = p2.tolist()
            w0[j] *= 0.5
            w0.append(w0[j])
            starts.append((np.array(mu0), np.array(s0), np.array(w0)))

    results = []
    degenerate = 0
    for idx, (mu0, sigma0, w0) in enumerate(starts):
        ll, mu, sigma, w, iters, status, worst = _em_run(
            y, mu0, sigma0, w0, max_iter, tol, consec, sigma_floor
        )
        if status == 2:
            degenerate += 1
            continue
        assert worst <= 1e-6 * (1.0 + abs(ll)), "EM iteration decreased the likelihood"
        results.append((ll, idx, mu, sigma, w, iters, status))

    if not results:
        raise DegenerateMixtureError(
            f"every EM start collapsed a component (m={m}, n={n})"
        )

    best_ll = max(r[0] for r in results)
    ll, idx, mu, sigma, w, iters, status = min(
        (r for r in results if r[0] >= best_ll - 1e-9), key=lambda r: r[1]
    )
    model = LognormalMixture(tuple(mu), tuple(sigma), tuple(w[:-1])).canonical()
    lnl_size = float(ll - np.sum(y))
    diag = FitDiagnostics(
        iterations=int(iters),
        converged=(status == 0),
        em_restarts_used=len(starts),
        em_degenerate_runs=degenerate,
    )
    se = None
    if compute_se:
        diag.grad_norm = scaled_grad_norm(model, sample)
        se = standard_errors(model, sample)
    return FitResult(model, lnl_size, 3 * m - 1, n, se, diag)


# ---------------------------------------------------------------------------
# power-law tail
# ---------------------------------------------------------------------------


def fit_pareto(sample: Sample, x_min: float) -> FitResult:
    """Closed-form (Hill) ML fit above a known cutoff; k counts only alpha."""
    sample = _as_sample(sample)
    n = sample.n
    if n < 2:
        raise InsufficientDataError("power-law fit needs at least 2 observations")
    if sample.values[0] < x_min:
        raise SupportError(f"power-law fit requires all data >= x_min={x_min}")
    denom = float(np.sum(sample.logs - np.log(x_min)))
    if denom <= 0.0:
        raise DegenerateSampleError("all observations at x_min; exponent undefined")
    alpha = 1.0 + n / denom
    lnl = n * np.log(alpha - 1.0) - n * np.log(x_min) - alpha * denom
    se = np.array([(alpha - 1.0) / np.sqrt(n)])
    diag = FitDiagnostics(iterations=0, converged=True, grad_norm=0.0)
    return FitResult(Pareto(alpha, x_min), float(lnl), 1, n, se, diag)


# ---------------------------------------------------------------------------
# truncated lognormal
# ---------------------------------------------------------------------------


def _lnt_negloglik(theta, y, y_min, n):
    mu, sigma = theta
    z0 = (y_min - mu) / sigma
    log_sf = log_ndtr(-z0)
    resid = y - mu
    lnl = -n * np.log(sigma) - n * _HALF_LOG_2PI - 0.5 * np.sum((resid / sigma) ** 2) - n * log_sf
    hazard = np.exp(-0.5 * z0 * z0 - _HALF_LOG_2PI - log_sf)
    g_mu = np.sum(resid) / sigma**2 - n * hazard / sigma
    g_sigma = -n / sigma + np.sum(resid**2) / sigma**3 - n * hazard * z0 / sigma
    return -lnl, np.array([-g_mu, -g_sigma])


_LNT_MU_OFFSETS = (0.0, 2.0, 4.0, 6.0)
_LNT_SIGMA_FACTORS = (0.5, 1.5, 5.0)


def fit_trunc_lognormal(
    sample: Sample, x_min: float, starts: str = "full", compute_se: bool = True
) -> FitResult:
    """Two-parameter ML fit of the left-truncated lognormal.

    The likelihood can be nearly flat along a ridge running out to the
    power-law limit (mu -> -inf with sigma growing), so the optimizer is
    launched from a grid of starting points and the near-tie across distant
    optima is reported via the ridge_suspected flag.  `starts="light"` uses a
    single moment start (for bootstrap refits).
    """
    sample = _as_sample(sample)
    n = sample.n
    if n < 3:
        raise InsufficientDataError("truncated-lognormal fit needs at least 3 observations")
    if sample.values[0] < x_min:
        raise SupportError(f"truncated-lognormal fit requires all data >= x_min={x_min}")
    y = sample.logs
    y_min = float(np.log(x_min))
    lm = float(np.mean(y))
    ls = float(np.std(y))
    if ls == 0.0:
        raise DegenerateSampleError("all log-sizes identical; fit undefined")

    if starts == "light":
        grid = [(lm, ls)]
    else:
        grid = [
            (lm - off * ls, fac * ls)
            for off in _LNT_MU_OFFSETS
            for fac in _LNT_SIGMA_FACTORS
        ]
    bounds = [(lm - 50.0, lm + 10.0), (1e-6, 20.0)]

    candidates = []
    for mu0, sigma0 in grid:
        mu0 = float(np.clip(mu0, *bounds[0]))
        sigma0 = float(np.clip(sigma0, *bounds[1]))
        res = minimize(
            _lnt_negloglik,
            x0=np.array([mu0, sigma0]),
            args=(y, y_min, n),
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200, "ftol": 1e-12, "gtol": 1e-10},
        )
        if np.all(np.isfinite(res.x)) and np.isfinite(res.fun):
            candidates.append(res)
    if not candidates:
        raise OptimizerError("no truncated-lognormal start converged")

    best = min(candidates, key=lambda r: r.fun)
    grad_scaled = float(np.max(np.abs(best.jac))) / n
    at_bound = any(
        np.isclose(best.x[i], bounds[i][j], atol=1e-8)
        for i in range(2)
        for j in range(2)
    )
    if at_bound and grad_scaled > 1e-4:
        raise OptimizerError(
            "truncated-lognormal optimum pinned at a parameter bound with "
            "non-vanishing gradient",
            best_point=(best.x.copy(), float(-best.fun)),
        )

    ridge = False
    far = [r for r in candidates if abs(r.x[0] - best.x[0]) > 1.0]
    if far:
        runner_up = min(far, key=lambda r: r.fun)
        ridge = bool(runner_up.fun - best.fun < 0.01)

    mu, sigma = float(best.x[0]), float(best.x[1])
    model = TruncatedLognormal(mu, sigma, x_min)
    # switch to the size-space likelihood (subtract the log Jacobian)
    lnl = float(-best.fun - np.sum(y))
    diag = FitDiagnostics(
        iterations=int(best.nit),
        converged=bool(best.success),
        grad_norm=grad_scaled,
        boundary_fit=at_bound,
        ridge_suspected=ridge,
    )
    se = standard_errors(model, sample) if compute_se else None
    return FitResult(model, lnl, 2, n, se, diag)


# ---------------------------------------------------------------------------
# families (fitting strategies for the bootstrap machinery)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """A named, refittable family: everything mc_pvalue needs.

    Kept picklable (fitters are partials over module-level functions) so
    bootstrap replicates can run in worker processes.
    """

    name: str
    fitter: Callable

    def fit(self, sample: Sample, seed=None) -> FitResult:
        return self.fitter(sample, seed)


def _family_ln(sample, seed=None):
    return fit_lognormal(sample)


def _family_stexp(sample, seed=None):
    return fit_stexp(sample)


def _family_mixture(sample, seed=None, m=2, **options):
    if seed is not None:
        options = {**options, "seed": int(seed)}
    return fit_mixture(sample, m, **options)


def _family_pareto(sample, seed=None, x_min=None):
    return fit_pareto(sample, x_min)


def _family_lnt(sample, seed=None, x_min=None, starts="full", compute_se=True):
    return fit_trunc_lognormal(sample, x_min, starts=starts, compute_se=compute_se)


def make_family(name: str, x_min: float | None = None, **options) -> Family:
    """Build a Family for one of: stexp, ln, 2ln, 3ln, pareto, lnt.

    Tail families require x_min.  Options reaching the mixture fitter:
    restarts, max_iter, tol, full_starts; the truncated fit accepts
    starts="full"|"light".
    """
    if name == "ln":
        return Family("ln", _family_ln)
    if name == "stexp":
        return Family("stexp", _family_stexp)
    if name in ("2ln", "3ln"):
        return Family(name, partial(_family_mixture, m=int(name[0]), **options))
    if name == "pareto":
        if x_min is None:
            raise ValueError("pareto family needs x_min")
        return Family("pareto", partial(_family_pareto, x_min=x_min))
    if name == "lnt":
        if x_min is None:
            raise ValueError("lnt family needs x_min")
        return Family(
            "lnt",
            partial(
                _family_lnt,
                x_min=x_min,
                starts=options.get("starts", "full"),
                compute_se=options.get("compute_se", True),
            ),
        )
    raise ValueError(f"unknown family name: {name!r}")
