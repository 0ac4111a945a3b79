"""Benchmark performance functions and the standard-normal input density.

Failure is ``S(x) <= 0``. Every evaluator accepts a single point of shape
``(d,)`` (returns a float) or a batch of shape ``(M, d)`` (returns ``(M,)``).
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import norm

from . import kernels
from .errors import DimensionMismatch

LOG_2PI = np.log(2.0 * np.pi)


def _batch(x, dim=None):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = np.atleast_2d(x)
    if dim is not None and batch.shape[1] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {batch.shape[1]}")
    if batch.shape[1] < 1:
        raise DimensionMismatch("points need at least one coordinate")
    return batch, single


def _finish(values, single):
    return float(values[0]) if single else values


def eval_s1(x, c=3.0):
    """Two-dimensional limit state with three failure regions."""
    batch, single = _batch(x, 2)
    return _finish(kernels.s1(batch, c), single)


def eval_s2(x, a=4.0, b=7.0):
    """Series system with four branches (two MPPs, four failure modes)."""
    batch, single = _batch(x, 2)
    return _finish(kernels.s2(batch, a, b), single)


def s2_branch_values(x, a=4.0, b=7.0):
    """The four branch expressions of S2 as an ``(M, 4)`` array."""
    batch, _ = _batch(x, 2)
    x1, x2 = batch[:, 0], batch[:, 1]
    d = x1 - x2
    s = (x1 + x2) / np.sqrt(2.0)
    base = a + d * d / 10.0
    offset = b / np.sqrt(2.0) + 1.0
    return np.column_stack([base - s, base + s, d + offset, -d + offset])


def eval_s3(x):
    """Modified Rastrigin limit state (disconnected failure domain)."""
    batch, single = _batch(x, 2)
    return _finish(kernels.s3(batch), single)


def eval_s4(x, gamma=3.5):
    """Linear limit state in any dimension; P_f = Phi(-gamma)."""
    batch, single = _batch(x)
    return _finish(kernels.s4(batch, gamma), single)


def target_logpdf(x, dim=None):
    """Log density of the standard normal N(0, I)."""
    batch, single = _batch(x, dim)
    d = batch.shape[1]
    return _finish(-0.5 * d * LOG_2PI - 0.5 * np.einsum("ij,ij->i", batch, batch), single)


@dataclass(frozen=True)
class TargetDensity:
    dim: int
    normalizing_constant: float = 1.0

    def log_density(self, x):
        return target_logpdf(x, self.dim)


@dataclass(frozen=True)
class LimitState:
    name: str
    dim: int
    params: dict
    reference_pf: float | None
    func: Callable = field(repr=False, compare=False)

    def evaluate(self, x):
        return self.func(x, **self.params)

    __call__ = evaluate

    @property
    def target(self):
        return TargetDensity(self.dim)


class CountingLimitState:
    """Per-run wrapper that counts performance-function evaluations."""

    def __init__(self, limit_state):
        self.limit_state = limit_state
        self.calls = 0

    @property
    def dim(self):
        return self.limit_state.dim

    def __call__(self, x):
        values = self.limit_state.evaluate(x)
        self.calls += np.size(values)
        return values


# name -> (evaluator, default params, fixed dim or None, published reference P_f)
_REGISTRY = {
    "s1": (eval_s1, {"c": 3.0}, 2, 3.48e-3),
    "s2": (eval_s2, {"a": 4.0, "b": 7.0}, 2, 6.4e-5),
    "s3": (eval_s3, {}, 2, 7.349e-2),
    "s4": (eval_s4, {"gamma": 3.5}, None, None),
}
DEFAULT_S4_DIM = 10


def benchmark_names():
    return list(_REGISTRY)


def default_params(name):
    return dict(_REGISTRY[name][1])


def get_limit_state(name, dim=None, **overrides):
    """Build a registered benchmark with optional parameter overrides.

    The stored reference probability is dropped when any parameter differs
    from its default, except for S4 whose tail probability is analytic.
    """
    try:
        func, defaults, fixed_dim, reference = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; choose from {benchmark_names()}") from None
    unknown = set(overrides) - set(defaults)
    if unknown:
        raise KeyError(f"benchmark {name} has no parameter(s) {sorted(unknown)}")
    params = {**defaults, **{k: float(v) for k, v in overrides.items()}}
    if fixed_dim is not None:
        if dim is not None and dim != fixed_dim:
            raise DimensionMismatch(f"{name} is defined for d_x = {fixed_dim} only")
        dim = fixed_dim
    elif dim is None:
        dim = DEFAULT_S4_DIM
    if dim < 1:
        raise DimensionMismatch("dimension must be positive")
    if name == "s4":
        reference = float(norm.cdf(-params["gamma"]))
    elif params != defaults:
        reference = None
    return LimitState(name, int(dim), params, reference, func)
