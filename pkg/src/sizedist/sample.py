"""Immutable container for a univariate positive-size sample."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SupportError


@dataclass(frozen=True)
class Sample:
    """Sorted positive observations plus their cached logs.

    Construct through :meth:`from_values`; the constructor itself assumes the
    array is already validated, sorted, and read-only.
    """

    values: np.ndarray
    logs: np.ndarray = field(repr=False)

    @classmethod
    def from_values(cls, values) -> "Sample":
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            raise SupportError("sample is empty")
        if not np.all(np.isfinite(arr)):
            raise SupportError("sample contains non-finite values")
        if np.any(arr <= 0.0):
            raise SupportError("sample values must be strictly positive")
        arr = np.sort(arr)
        arr.setflags(write=False)
        logs = np.log(arr)
        logs.setflags(write=False)
        return cls(values=arr, logs=logs)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def tail(self, x_min: float) -> "Sample":
        """Sub-sample of values >= x_min (new Sample)."""
        keep = self.values >= x_min
        if not np.any(keep):
            raise SupportError(f"no observations at or above x_min={x_min}")
        return Sample.from_values(self.values[keep])

    def __len__(self) -> int:
        return self.n
