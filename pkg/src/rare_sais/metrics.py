"""Accuracy statistics over repeated runs of one method on one benchmark."""
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZeroEstimates, ZeroMean, ZeroReference


@dataclass
class RunEnsemble:
    method: str
    benchmark: str
    estimates: np.ndarray
    reference_pf: float
    performance_calls: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    def __post_init__(self):
        self.estimates = np.atleast_1d(np.asarray(self.estimates, dtype=float))
        self.performance_calls = np.atleast_1d(np.asarray(self.performance_calls, dtype=np.int64))
        if self.estimates.ndim != 1 or self.estimates.size < 1:
            raise ValueError("an ensemble needs at least one estimate")
        if not np.all(np.isfinite(self.estimates)) or np.any(self.estimates < 0):
            raise ValueError("estimates must be finite and non-negative")

    @property
    def repetitions(self):
        return self.estimates.size

    @property
    def zero_count(self):
        return int(np.count_nonzero(self.estimates == 0.0))

    @property
    def mean(self):
        return float(self.estimates.mean())

    @property
    def mean_calls(self):
        return float(self.performance_calls.mean()) if self.performance_calls.size else float("nan")


def rrmse(ensemble):
    """Root mean squared error relative to the reference probability."""
    p = ensemble.reference_pf
    if p is None or not p > 0:
        raise ZeroReference("relative error needs a positive reference probability")
    return float(np.sqrt(np.mean((ensemble.estimates - p) ** 2)) / p)


def male(ensemble):
    """Mean absolute natural-log ratio to the reference; zero estimates are skipped.

    The number skipped is ``ensemble.zero_count``.
    """
    p = ensemble.reference_pf
    if p is None or not p > 0:
        raise ZeroReference("log error needs a positive reference probability")
    positive = ensemble.estimates[ensemble.estimates > 0]
    if positive.size == 0:
        raise AllZeroEstimates("every estimate is zero")
    return float(np.mean(np.abs(np.log(positive / p))))


def coefficient_of_variation(ensemble):
    """Sample standard deviation over sample mean, in percent."""
    if ensemble.repetitions < 2:
        raise ValueError("coefficient of variation needs at least two estimates")
    mean = ensemble.estimates.mean()
    if mean == 0:
        raise ZeroMean("mean estimate is zero")
    return float(100.0 * ensemble.estimates.std(ddof=1) / mean)
