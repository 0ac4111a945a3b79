"""Importance weighting: deterministic-mixture weights, ESS and tempering.

Weights are carried as log-weights and only exponentiated after a max
shift, so tiny densities in high dimension do not underflow.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AllImpossible, DimensionMismatch, EmptyBatch
from .limitstate import target_logpdf
from .numkernel import ProposalParams, log_sum_exp

__all__ = [
    "MixtureProposal",
    "ProposalParams",
    "SampleBatch",
    "dm_log_weights",
    "ess",
    "intermediate_failure_estimate",
    "normalize_weights",
    "temper_weights",
    "tempering_exponent",
]


class MixtureProposal:
    """Equally weighted mixture of Gaussian proposals."""

    def __init__(self, components):
        self.components = list(components)
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise DimensionMismatch(f"components disagree on dimension: {sorted(dims)}")
        self.dim = dims.pop()

    def __len__(self):
        return len(self.components)

    def component_logpdf(self, x):
        """``(M, N)`` log-densities of every point under every component."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"points have dim {x.shape[1]}, mixture has {self.dim}")
        means = np.stack([c.mean for c in self.components])
        chols = np.stack([c.chol for c in self.components])
        return kernels.component_logpdf(x, means, chols)

    def logpdf(self, x):
        comp = self.component_logpdf(x)
        return log_sum_exp(comp, axis=1) - np.log(len(self))


@dataclass
class SampleBatch:
    """One iteration's draws, stored column-wise.

    ``origin`` is the proposal that generated each point and ``assigned`` the
    proposal it was reassigned to (``-1`` when it is not a seed).
    """

    points: np.ndarray
    performance: np.ndarray
    origin: np.ndarray
    log_weight: np.ndarray
    assigned: np.ndarray | None = None

    def __post_init__(self):
        if self.assigned is None:
            self.assigned = np.full(len(self.performance), -1, dtype=int)

    def __len__(self):
        return len(self.performance)

    @property
    def normalized_weight(self):
        return normalize_weights(self.log_weight)


def dm_log_weights(samples, mixture, target=None):
    """Log of target(x) / Psi(x) with Psi the equal-weight mixture."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    log_target = target_logpdf(samples) if target is None else target.log_density(samples)
    return log_target - mixture.logpdf(samples)


def normalize_weights(log_weights):
    log_weights = np.asarray(log_weights, dtype=float)
    if log_weights.size == 0:
        raise EmptyBatch("no weights to normalize")
    total = log_sum_exp(log_weights)
    if total == -np.inf:
        raise AllImpossible("every log-weight is -inf")
    return np.exp(log_weights - total)


def ess(normalized_weights):
    w = np.asarray(normalized_weights, dtype=float)
    w = w[w > 0]
    return float(1.0 / np.sum(w * w))


def tempering_exponent(t):
    """Sigmoid schedule 1 / (1 + e^-t); lies in (0.5, 1) for t >= 1."""
    return 1.0 / (1.0 + np.exp(-t))


def temper_weights(log_weights, t):
    """Raise the weights to the power gamma_t (a scaling in log space)."""
    if t < 1:
        raise ValueError(f"iteration index must be >= 1, got {t}")
    return tempering_exponent(t) * np.asarray(log_weights, dtype=float)


def intermediate_failure_estimate(log_weights, performance, threshold=0.0):
    """Unnormalized IS estimate ``mean(w * 1{S <= threshold})`` over the batch."""
    log_weights = np.asarray(log_weights, dtype=float)
    performance = np.asarray(performance, dtype=float)
    if log_weights.size == 0:
        raise EmptyBatch("cannot estimate from an empty batch")
    failed = performance <= threshold
    if not failed.any():
        return 0.0
    return float(np.exp(log_sum_exp(log_weights[failed]) - np.log(log_weights.size)))
