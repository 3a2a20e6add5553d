"""Information criteria and the paired likelihood-ratio (Vuong) comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .fitting import FitResult
from .sample import Sample


@dataclass(frozen=True)
class CriteriaValues:
    aic: float
    bic: float
    hqc: Optional[float]  # undefined below n = 3


def criteria(log_likelihood: float, k: int, n: int) -> CriteriaValues:
    """AIC / BIC / HQC from a size-space log-likelihood.

    Lower is better for all three.  HQC needs ln(ln(n)) and is reported as
    None for n < 3 rather than a complex or negative-log artifact.
    """
    if k < 1:
        raise ValueError("k must be a positive parameter count")
    if n < 1:
        raise ValueError("n must be a positive sample size")
    aic = 2.0 * k - 2.0 * log_likelihood
    bic = k * np.log(n) - 2.0 * log_likelihood
    hqc = 2.0 * k * np.log(np.log(n)) - 2.0 * log_likelihood if n >= 3 else None
    return CriteriaValues(float(aic), float(bic), hqc if hqc is None else float(hqc))


@dataclass
class SelectionEntry:
    name: str
    k: int
    n: int
    log_likelihood: float
    values: CriteriaValues


@dataclass
class SelectionReport:
    entries: list
    winners: dict  # criterion -> list of names sharing the strict minimum


def selection_report(fits: dict[str, FitResult]) -> SelectionReport:
    """Criteria table over competing fits of the same data.

    All fits must cover the same sample size; winners are the argmin per
    criterion, with exact ties all listed.
    """
    if not fits:
        raise ValueError("no fits to compare")
    sizes = {fit.n for fit in fits.values()}
    if len(sizes) != 1:
        raise ValueError(f"fits cover different sample sizes: {sorted(sizes)}")

    entries = [
        SelectionEntry(name, fit.k, fit.n, fit.log_likelihood,
                       criteria(fit.log_likelihood, fit.k, fit.n))
        for name, fit in fits.items()
    ]
    winners = {}
    for crit in ("aic", "bic", "hqc"):
        vals = [(e.name, getattr(e.values, crit)) for e in entries]
        defined = [(name, v) for name, v in vals if v is not None]
        if not defined:
            winners[crit] = []
            continue
        best = min(v for _, v in defined)
        winners[crit] = [name for name, v in defined if v == best]
    return SelectionReport(entries=entries, winners=winners)


@dataclass
class VuongResult:
    statistic: float
    p_value: float
    n: int
    name_a: str
    name_b: str
    favored: str  # name_a, name_b, or "neither"
    correction: str


def vuong(
    fit_a: FitResult,
    fit_b: FitResult,
    data: Sample,
    correction: str = "none",
    alpha_level: float = 0.05,
) -> VuongResult:
    """Vuong closeness test on per-observation log-density differences.

    Positive statistics lean toward fit_a.  Both fits must describe the same
    tail: models carrying an x_min must agree on it, and the data must lie in
    both supports.  The optional Schwarz correction penalizes the
    per-observation mean by (k_a - k_b) ln(n) / (2n).
    """
    if correction not in ("none", "schwarz"):
        raise ValueError("correction must be 'none' or 'schwarz'")
    xm_a = getattr(fit_a.model, "x_min", None)
    xm_b = getattr(fit_b.model, "x_min", None)
    if xm_a is not None and xm_b is not None and xm_a != xm_b:
        raise ValueError(f"fits disagree on the cutoff: {xm_a} vs {xm_b}")

    sample = data if isinstance(data, Sample) else Sample.from_values(data)
    d = np.asarray(fit_a.model.log_pdf(sample.values)) - np.asarray(
        fit_b.model.log_pdf(sample.values)
    )
    n = d.size
    sd = float(np.std(d, ddof=1)) if n > 1 else 0.0
    name_a = fit_a.model.family_name
    name_b = fit_b.model.family_name
    if sd == 0.0:
        return VuongResult(0.0, 1.0, n, name_a, name_b, "neither", correction)

    num = float(np.mean(d))
    if correction == "schwarz":
        num = num - (fit_a.k - fit_b.k) * np.log(n) / (2.0 * n)
    stat = np.sqrt(n) * num / sd
    p = 2.0 * float(ndtr(-abs(stat)))
    favored = "neither"
    if p < alpha_level:
        favored = name_a if stat > 0 else name_b
    return VuongResult(float(stat), p, n, name_a, name_b, favored, correction)
