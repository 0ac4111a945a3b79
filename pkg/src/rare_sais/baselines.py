"""Reference estimators: crude Monte Carlo, SS-IS and CE-PMC.

SS-IS and CE-PMC follow their usual characterization rather than any one
published code: SS-IS keeps a single proposal with fixed covariance and
moves its mean to the most probable failure sample of each level; CE-PMC
refits a Gaussian mixture by cross-entropy on DM-weighted samples with a
quantile level schedule, without reassignment, shrinkage or recycling.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMixture, NoFailureSamples, NotPositiveDefinite
from .isw import MixtureProposal, SampleBatch, dm_log_weights, intermediate_failure_estimate
from .limitstate import CountingLimitState, target_logpdf
from .numkernel import (
    ProposalParams,
    log_sum_exp,
    mvn_logpdf,
    mvn_sample,
    regularized_cholesky,
    weighted_covariance,
    weighted_mean,
)

log = logging.getLogger(__name__)

ORACLE_BLOCK = 10**6


def _as_rng(rng):
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    return rng


@dataclass
class CrudeMCResult:
    estimate: float
    std_error: float
    samples: int
    failures: int


def crude_mc(limit_state, n, rng=None, block_size=ORACLE_BLOCK):
    """Fraction of standard-normal draws with ``S <= 0`` and its binomial SE.

    Draws are streamed in blocks, each from its own child stream spawned in
    block order, so memory stays O(block) and the result does not depend on
    how blocks are scheduled.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = _as_rng(rng)
    n_blocks = -(-n // block_size)
    failures = 0
    for b, child in enumerate(rng.spawn(n_blocks)):
        size = min(block_size, n - b * block_size)
        x = child.standard_normal((size, limit_state.dim))
        failures += int(np.count_nonzero(limit_state.evaluate(x) <= 0.0))
    p = failures / n
    return CrudeMCResult(p, float(np.sqrt(p * (1.0 - p) / n)), n, failures)


@dataclass
class BaselineResult:
    estimate: float
    iterations: int
    performance_calls: int
    converged: bool
    thresholds: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    final_batch: SampleBatch | None = None


def ss_is(limit_state, samples_per_level=200, rho=0.1, max_iterations=50, rng=None, sigma=1.0,
          estimator="final_level"):
    """Subset simulation with a single relocating Gaussian IS proposal.

    Level ``t`` draws ``K`` points from ``N(mu_t, sigma^2 I)`` and sets the
    threshold to the rho-quantile of the performances inside the previous
    event. The next mean is the new-level sample with the highest target
    density; the covariance never changes.

    ``estimator="final_level"`` returns the plain IS estimate
    ``mean(w * 1{S<=0})`` of the level that reaches the failure domain.
    ``"ratio_product"`` instead multiplies the self-normalized conditional
    ratios ``sum w 1{S<=b_t} / sum w 1{S<=b_{t-1}}`` of every level.
    """
    if estimator not in ("final_level", "ratio_product"):
        raise ValueError("estimator must be 'final_level' or 'ratio_product'")
    rng = _as_rng(rng)
    perf = CountingLimitState(limit_state)
    d = limit_state.dim
    proposal = ProposalParams(np.zeros(d), sigma**2 * np.eye(d))
    fixed_cov = proposal.cov.copy()
    b_prev = np.inf
    log_p = 0.0
    thresholds, trace = [], []
    converged = False
    for t in range(1, max_iterations + 1):
        x = mvn_sample(rng, proposal, samples_per_level)
        s = perf(x)
        lw = target_logpdf(x) - mvn_logpdf(x, proposal)
        inside_prev = s <= b_prev
        if not inside_prev.any():
            raise NoFailureSamples(f"no samples inside the level-{t - 1} event")
        b_t = float(np.quantile(s[inside_prev], rho))
        if b_t <= 0.0:
            b_t = 0.0
        inside = s <= b_t
        if not inside.any():
            raise NoFailureSamples(f"no samples below threshold {b_t} at level {t}")
        log_p += log_sum_exp(lw[inside]) - log_sum_exp(lw[inside_prev])
        thresholds.append(b_t)
        trace.append({"t": t, "threshold": b_t, "mean": proposal.mean.copy(),
                      "cov": proposal.cov.copy(), "conditional": float(np.exp(log_p))})
        if b_t == 0.0:
            converged = True
            break
        best = np.flatnonzero(inside)[np.argmax(target_logpdf(x[inside]))]
        proposal = ProposalParams(x[best], fixed_cov)
        b_prev = b_t
    if not converged:
        log.warning("SS-IS did not reach the failure level in %d levels", max_iterations)
    if estimator == "final_level":
        estimate = intermediate_failure_estimate(lw, s)
    else:
        estimate = float(np.exp(log_p))
    batch = SampleBatch(x, s, np.zeros(len(s), dtype=int), lw)
    return BaselineResult(estimate, len(thresholds), perf.calls, converged,
                          thresholds, trace, batch)


def _snis(log_weights, performance):
    failed = performance <= 0.0
    if not failed.any():
        return 0.0
    return float(np.exp(log_sum_exp(log_weights[failed]) - log_sum_exp(log_weights)))


def ce_pmc(limit_state, n_proposals=6, samples_per_proposal=200, rho=0.1, max_iterations=50,
           rng=None, init_box=(-4.0, 4.0), sigma=1.0, initial_means=None,
           estimator="unnormalized"):
    """Cross-entropy population Monte Carlo with deterministic-mixture weights.

    Every iteration samples ``N*K`` points, sets the level to
    ``max(rho-quantile of S, 0)`` and refits each component from its own
    samples below the level, weighted by DM weights. Once the level reaches
    zero one more sampling round produces the estimate.
    """
    if estimator not in ("unnormalized", "self_normalized"):
        raise ValueError("estimator must be 'unnormalized' or 'self_normalized'")
    rng = _as_rng(rng)
    perf = CountingLimitState(limit_state)
    d = limit_state.dim
    if initial_means is None:
        means = rng.uniform(init_box[0], init_box[1], size=(n_proposals, d))
    else:
        means = np.atleast_2d(np.asarray(initial_means, dtype=float))
    params = [ProposalParams(m, sigma**2 * np.eye(d)) for m in means]
    thresholds, trace = [], []
    estimate = np.nan
    final_pending = False
    converged = False
    batch = None
    for t in range(1, max_iterations + 1):
        mixture = MixtureProposal(params)
        x = np.concatenate([mvn_sample(rng, p, samples_per_proposal) for p in params])
        origin = np.repeat(np.arange(n_proposals), samples_per_proposal)
        s = perf(x)
        lw = dm_log_weights(x, mixture, limit_state.target)
        if not np.isfinite(log_sum_exp(lw)):
            log.warning("CE-PMC weights collapsed at t=%d; keeping the last estimate", t)
            if np.isnan(estimate):
                raise DegenerateMixture("weights collapsed before any estimate")
            break
        if estimator == "unnormalized":
            estimate = intermediate_failure_estimate(lw, s)
        else:
            estimate = _snis(lw, s)
        batch = SampleBatch(x, s, origin, lw)
        if final_pending:
            trace.append({"t": t, "level": 0.0, "estimate": estimate})
            converged = True
            break
        level = max(float(np.quantile(s, rho)), 0.0)
        thresholds.append(level)
        trace.append({"t": t, "level": level, "estimate": estimate})
        w = np.exp(lw - lw.max())
        new_params = []
        for n, prev in enumerate(params):
            own = (origin == n) & (s <= level)
            if np.count_nonzero(own) < 2 or not w[own].sum() > 0:
                new_params.append(prev)
                continue
            mean = weighted_mean(x[own], w[own])
            cov = weighted_covariance(x[own], w[own], mean)
            if not np.trace(cov) > 0:
                new_params.append(prev)
                continue
            try:
                cov, _, _ = regularized_cholesky(cov)
            except NotPositiveDefinite:
                new_params.append(prev)
                continue
            new_params.append(ProposalParams(mean, cov))
        params = new_params
        if level == 0.0:
            final_pending = True
    if not converged:
        log.warning("CE-PMC stopped after %d iterations without reaching the failure level",
                    max_iterations)
    return BaselineResult(float(estimate), len(trace), perf.calls, converged,
                          thresholds, trace, batch)
