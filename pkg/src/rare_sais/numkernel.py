"""Linear-algebra and Gaussian kernels shared by the samplers.

Vectors are 1-D float arrays and matrices are 2-D float arrays; batches of
points are ``(M, d)`` arrays with one point per row.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    AllZeroWeights,
    DimensionMismatch,
    EmptyInput,
    NotPositiveDefinite,
    ZeroDenominator,
)

BETA_FLOOR = 1e-8
JITTER_SCALE = 1e-8


@dataclass(eq=False)
class ProposalParams:
    """Mean and covariance of one Gaussian importance density."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = self.mean.shape[0]
        if self.cov.shape != (d, d):
            raise DimensionMismatch(f"covariance {self.cov.shape} does not match mean dim {d}")

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def chol(self):
        if getattr(self, "_chol_of", None) is not self.cov:
            self._chol = cholesky(self.cov)
            self._chol_of = self.cov
        return self._chol


def cholesky(m):
    """Lower-triangular ``L`` with ``L @ L.T == m`` for SPD ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"cholesky needs a square matrix, got {m.shape}")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None


def regularized_cholesky(cov):
    """Cholesky with a single jitter retry.

    Returns ``(cov_used, L, jittered)``. The retry adds
    ``1e-8 * tr(cov)/d * I``; a second failure propagates.
    """
    try:
        return cov, cholesky(cov), False
    except NotPositiveDefinite:
        d = cov.shape[0]
        bumped = cov + JITTER_SCALE * np.trace(cov) / d * np.eye(d)
        return bumped, cholesky(bumped), True


def mvn_logpdf(x, p):
    """Log density of ``N(p.mean, p.cov)`` at a point or at each row of a batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = np.atleast_2d(x)
    if batch.shape[1] != p.dim:
        raise DimensionMismatch(f"point dim {batch.shape[1]} vs proposal dim {p.dim}")
    out = kernels.component_logpdf(batch, p.mean[None, :], p.chol[None, :, :])[:, 0]
    return float(out[0]) if single else out


def mvn_sample(rng, p, count):
    """Draw ``count`` rows ``mean + L z`` with ``z`` standard normal."""
    z = rng.standard_normal((count, p.dim))
    return p.mean + z @ p.chol.T


def log_sum_exp(values, axis=None):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyInput("log_sum_exp of an empty sequence")
    if axis is None:
        # zero terms drop out so padding never changes the summation order
        finite = values[values > -np.inf]
        values = finite if finite.size else values.ravel()[:1]
    peak = np.max(values, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(values - peak), axis=axis, keepdims=True)) + peak
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def _check_weights(samples, weights):
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (samples.shape[0],):
        raise DimensionMismatch(f"{weights.shape[0]} weights for {samples.shape[0]} samples")
    total = weights.sum()
    if not total > 0:
        raise AllZeroWeights("weights must contain a strictly positive entry")
    return samples, weights, total


def weighted_mean(samples, weights):
    samples, weights, total = _check_weights(samples, weights)
    return weights @ samples / total


def weighted_covariance(samples, weights, center):
    """Weighted second moment about ``center`` (not the weighted mean)."""
    samples, weights, total = _check_weights(samples, weights)
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.shape[0] != samples.shape[1]:
        raise DimensionMismatch("center dimension differs from sample dimension")
    dev = samples - center
    cov = (dev * weights[:, None]).T @ dev / total
    return 0.5 * (cov + cov.T)


def lw_shrinkage_coefficient(samples, s_hat, center=None):
    """Ledoit-Wolf coefficient for blending ``s_hat`` into the running covariance.

    ``center=None`` uses the raw outer products ``x x^T``; pass a center to
    use ``(x - c)(x - c)^T`` instead. The result is clamped to ``[1e-8, 1]``.
    Raises ZeroDenominator when ``s_hat`` is isotropic.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    s_hat = np.atleast_2d(np.asarray(s_hat, dtype=float))
    n, d = samples.shape
    if n < 1:
        raise EmptyInput("no samples for the shrinkage coefficient")
    if s_hat.shape != (d, d):
        raise DimensionMismatch("s_hat does not match the sample dimension")
    y = samples if center is None else samples - np.asarray(center, dtype=float)
    # ||y y^T - S||_F^2 = |y|^4 - 2 y^T S y + ||S||_F^2
    sq_norms = np.einsum("ij,ij->i", y, y)
    quad = np.einsum("ij,jk,ik->i", y, s_hat, y)
    s_fro2 = np.sum(s_hat * s_hat)
    numerator = np.sum(sq_norms**2 - 2.0 * quad + s_fro2)
    tr = np.trace(s_hat)
    tr_sq = s_fro2  # tr(S^2) for symmetric S
    spread = tr_sq - tr * tr / d
    if spread <= 1e-14 * max(tr_sq, np.finfo(float).tiny):
        raise ZeroDenominator("intermediate covariance is isotropic")
    beta = numerator / (n * n * spread)
    return float(min(max(beta, BETA_FLOOR), 1.0))


def shrink_covariance(prev, s_hat, beta, eta):
    """Blend previous, empirical and isotropic covariances."""
    prev = np.asarray(prev, dtype=float)
    s_hat = np.asarray(s_hat, dtype=float)
    if prev.shape != s_hat.shape or prev.shape[0] != prev.shape[1]:
        raise DimensionMismatch(f"cannot blend {prev.shape} with {s_hat.shape}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if eta < 0.0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    d = prev.shape[0]
    out = (1.0 - beta) * prev + beta * s_hat
    out = out + eta * np.trace(s_hat) / d * np.eye(d)
    return 0.5 * (out + out.T)
