"""Power-law cutoff selection by KS-distance minimization.

Every sufficiently populated distinct value is tried as the cutoff; the tail
exponent is refit above each candidate and the candidate whose fitted power
law is closest (in sup distance) to the tail empirical CDF wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .sample import Sample


@dataclass
class TailScan:
    candidates: np.ndarray
    distances: np.ndarray
    chosen_xmin: float
    tail_n: int
    alpha_at_choice: float


def _candidate_indices(values: np.ndarray, n_floor: int) -> np.ndarray:
    """Start index of the tail for each distinct value keeping >= n_floor obs."""
    uniq, first = np.unique(values, return_index=True)
    keep = values.size - first >= n_floor
    return first[keep]


def select_xmin(sample: Sample, n_floor: int = 50, max_candidates: int = 2000) -> TailScan:
    """Scan cutoffs, refitting the exponent each time; smallest KS wins.

    Exact ties go to the smallest cutoff.  When more than `max_candidates`
    distinct values qualify, a quantile-spaced subset is scanned instead.
    """
    sample = sample if isinstance(sample, Sample) else Sample.from_values(sample)
    values = sample.values
    logs = sample.logs
    n = sample.n
    if n < 2 * n_floor:
        raise InsufficientDataError(
            f"cutoff scan needs at least {2 * n_floor} observations (n_floor={n_floor})"
        )

    starts = _candidate_indices(values, n_floor)
    if starts.size == 0:
        raise InsufficientDataError("no candidate cutoff keeps enough tail observations")
    if starts.size > max_candidates:
        pick = np.unique(np.round(np.linspace(0, starts.size - 1, max_candidates)).astype(int))
        starts = starts[pick]

    # suffix sums of logs make each exponent refit O(1)
    suffix = np.concatenate([np.cumsum(logs[::-1])[::-1], [0.0]])

    cands = values[starts]
    dists = np.empty(starts.size)
    alphas = np.empty(starts.size)
    for j, i0 in enumerate(starts):
        k = n - i0
        log_c = logs[i0]
        denom = suffix[i0] - k * log_c
        if denom <= 0.0:
            dists[j] = np.inf
            alphas[j] = np.nan
            continue
        alpha = 1.0 + k / denom
        alphas[j] = alpha
        p = -np.expm1((1.0 - alpha) * (logs[i0:] - log_c))
        i = np.arange(1, k + 1)
        dists[j] = max(np.max(i / k - p), np.max(p - (i - 1) / k))

    best = int(np.argmin(dists))
    if not np.isfinite(dists[best]):
        raise InsufficientDataError("every candidate tail was degenerate")
    i0 = int(starts[best])
    return TailScan(
        candidates=cands,
        distances=dists,
        chosen_xmin=float(cands[best]),
        tail_n=n - i0,
        alpha_at_choice=float(alphas[best]),
    )
