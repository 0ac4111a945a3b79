"""Subset adaptive importance sampling (SAIS).

Each iteration draws ``K`` points from each of ``N`` Gaussian proposals,
moves an intermediate threshold toward the failure level using per-proposal
elites, reassigns seeds to their most likely proposal, refits every proposal
by weighted cross-entropy moments with shrinkage, and records an
intermediate failure estimate. The final estimate recycles all iterations
with exponentially decaying weights.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZeroWeights, NoSeedsAnywhere, ZeroDenominator
from .isw import (
    MixtureProposal,
    SampleBatch,
    dm_log_weights,
    ess,
    intermediate_failure_estimate,
    normalize_weights,
    temper_weights,
)
from .limitstate import CountingLimitState
from .numkernel import (
    BETA_FLOOR,
    ProposalParams,
    lw_shrinkage_coefficient,
    mvn_sample,
    regularized_cholesky,
    shrink_covariance,
    weighted_covariance,
    weighted_mean,
)

log = logging.getLogger(__name__)

ETA_SCHEDULES = ("inverse_t", "beta_over_t")
THRESHOLD_ORDERS = ("descending", "ascending")
ESS_SCOPES = ("active", "assigned")


@dataclass
class SaisConfig:
    n_proposals: int = 6
    samples_per_proposal: int = 200
    rho: float = 0.1
    forgetting: float = 0.5
    target_threshold: float = 0.0
    max_iterations: int = 50
    init_box: tuple = (-4.0, 4.0)
    initial_means: np.ndarray | None = None
    sigma: float = 1.0
    initial_covariance: np.ndarray | None = None
    seed: int | None = None
    eta_schedule: str = "inverse_t"
    lw_centered: bool = False
    threshold_order: str = "descending"
    ess_measure: str = "inverse_sum_squares"
    ess_scope: str = "active"

    def validate(self):
        if self.n_proposals < 1:
            raise ValueError("n_proposals must be >= 1")
        if self.samples_per_proposal < 1:
            raise ValueError("samples_per_proposal must be >= 1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("quantile must lie in (0,1)")
        if not 0.0 < self.forgetting < 1.0:
            raise ValueError("forgetting factor must lie in (0,1)")
        if self.n_proposals * self.samples_per_proposal * self.rho < 1.0:
            raise ValueError("N * K * rho must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.eta_schedule not in ETA_SCHEDULES:
            raise ValueError(f"eta_schedule must be one of {ETA_SCHEDULES}")
        if self.threshold_order not in THRESHOLD_ORDERS:
            raise ValueError(f"threshold_order must be one of {THRESHOLD_ORDERS}")
        if self.ess_scope not in ESS_SCOPES:
            raise ValueError(f"ess_scope must be one of {ESS_SCOPES}")
        if self.ess_measure != "inverse_sum_squares":
            raise NotImplementedError("only the inverse-sum-of-squares ESS is implemented")
        lo, hi = self.init_box
        if not lo < hi:
            raise ValueError("init_box must be (low, high) with low < high")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        return self

    def initial_proposals(self, dim, rng):
        if self.initial_means is not None:
            means = np.atleast_2d(np.asarray(self.initial_means, dtype=float))
            if means.shape != (self.n_proposals, dim):
                raise ValueError(f"initial_means must have shape ({self.n_proposals}, {dim})")
        else:
            lo, hi = self.init_box
            means = rng.uniform(lo, hi, size=(self.n_proposals, dim))
        if self.initial_covariance is not None:
            cov = np.asarray(self.initial_covariance, dtype=float)
        else:
            cov = self.sigma**2 * np.eye(dim)
        return [ProposalParams(m, cov.copy()) for m in means]


@dataclass
class SubsetLevel:
    t: int
    threshold: float
    elites: np.ndarray
    per_proposal_failure_counts: np.ndarray
    intermediate_estimate: float
    ess_per_proposal: np.ndarray
    tempered: np.ndarray
    proposal_params_after: list
    assigned_counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))


@dataclass
class SaisResult:
    p_f_recycled: float
    p_f_last_iteration: float
    levels: list
    iterations_used: int
    performance_calls: int
    alpha_weights: np.ndarray
    converged: bool
    jitter_count: int
    final_batch: SampleBatch | None = None

    @property
    def thresholds(self):
        return np.array([lv.threshold for lv in self.levels])

    @property
    def intermediate_estimates(self):
        return np.array([lv.intermediate_estimate for lv in self.levels])


def recycling_weights(n_iterations, forgetting):
    """Normalized forgetting weights ``alpha * lambda**(T - t)`` for t = 1..T."""
    T = int(n_iterations)
    if T < 1:
        raise ValueError("need at least one iteration")
    lam = float(forgetting)
    raw = lam ** (T - np.arange(1, T + 1))
    # 1 - lam**T via expm1 keeps precision when lam is close to 1
    return raw * ((1.0 - lam) / -np.expm1(T * np.log1p(-(1.0 - lam))))


def recycled_estimate(estimates, forgetting):
    estimates = np.asarray(estimates, dtype=float)
    return float(recycling_weights(len(estimates), forgetting) @ estimates)


def select_failure_seeds(performance, origin, n_proposals, region_threshold):
    """Indices of each proposal's samples with ``S <= region_threshold``."""
    performance = np.asarray(performance)
    origin = np.asarray(origin)
    inside = performance <= region_threshold
    return [np.flatnonzero(inside & (origin == n)) for n in range(n_proposals)]


def select_elites(seeds, performance, rho):
    """Union of each proposal's ``floor(rho * M_n)`` seeds with the smallest S.

    A proposal with at least one seed always contributes its best seed.
    Returns ``(elite_indices, per_proposal_counts)``.
    """
    performance = np.asarray(performance)
    if all(len(s) == 0 for s in seeds):
        raise NoSeedsAnywhere("no proposal produced a sample inside the current event")
    picked, counts = [], []
    for idx in seeds:
        n_keep = int(np.floor(rho * len(idx) + 1e-9))
        if n_keep == 0 and len(idx) > 0:
            n_keep = 1
        order = np.argsort(performance[idx], kind="stable")
        picked.append(idx[order[:n_keep]])
        counts.append(n_keep)
    return np.concatenate(picked), np.array(counts)


def adapt_threshold(elite_performance, rho, target_b=0.0, order="descending"):
    """Order statistic ``floor(rho * A)`` of the elite performances.

    With ``order="descending"`` this is the floor(rho*A)-th largest value; the
    index is clamped to at least 1. Values at or below ``target_b`` return
    ``target_b`` exactly.
    """
    values = np.asarray(elite_performance, dtype=float)
    if values.size == 0:
        raise NoSeedsAnywhere("no elites to set a threshold from")
    ranked = np.sort(values)
    if order == "descending":
        ranked = ranked[::-1]
    idx = max(int(np.floor(rho * values.size + 1e-9)), 1)
    b = float(ranked[idx - 1])
    return target_b if b <= target_b else b


def reassign_samples(points, mixture):
    """Index of the most likely component for each point (ties -> lowest index)."""
    return np.argmax(mixture.component_logpdf(points), axis=1)


@dataclass
class ProposalUpdate:
    params: ProposalParams
    ess: float
    tempered: bool
    beta: float
    jittered: bool
    updated: bool


def ce_update_proposal(points, log_weights, active, prev, t, *, eta_schedule="inverse_t",
                       lw_centered=False, beta=None, eta=None, ess_scope="active"):
    """Cross-entropy refit of one proposal from its reassigned seeds.

    ``points`` and ``log_weights`` cover every seed assigned to this proposal;
    ``active`` flags those inside the current intermediate event. With
    ``ess_scope="active"`` the ESS gate and every moment use only the active
    seeds; ``"assigned"`` measures the ESS over all assigned seeds instead.
    ``beta``/``eta`` override the shrinkage coefficient and regularizer.
    """
    if ess_scope == "active":
        points, log_weights, active = points[active], log_weights[active], active[active]
    n_assigned = len(log_weights)
    if n_assigned == 0 or not np.any(active):
        return ProposalUpdate(prev, np.nan, False, np.nan, False, False)
    w_bar = normalize_weights(log_weights)
    local_ess = ess(w_bar)
    tempered = local_ess < n_assigned / 2.0
    x = points[active]
    try:
        if not tempered:
            mean = weighted_mean(x, w_bar[active])
            center = prev.mean
        else:
            w_star = normalize_weights(temper_weights(log_weights, t))
            mean = weighted_mean(x, w_star[active])
            center = mean
            w_bar = w_star
        s_hat = weighted_covariance(x, w_bar[active], center)
    except AllZeroWeights:
        log.warning("proposal kept: all weights vanished at t=%d", t)
        return ProposalUpdate(prev, local_ess, tempered, np.nan, False, False)
    if beta is None:
        try:
            beta = lw_shrinkage_coefficient(x, s_hat, center if lw_centered else None)
        except ZeroDenominator:
            # isotropic s_hat -> full weight; empty s_hat carries no information
            beta = 1.0 if np.trace(s_hat) > 0 else BETA_FLOOR
    if eta is None:
        eta = 0.1 / t if eta_schedule == "inverse_t" else beta / t
    cov = shrink_covariance(prev.cov, s_hat, beta, eta)
    cov, _, jittered = regularized_cholesky(cov)
    return ProposalUpdate(ProposalParams(mean, cov), local_ess, tempered, beta, jittered, True)


def ce_update(points, performance, assigned, log_weights, params, b_t, t, config):
    """Refit every proposal; proposals without active seeds keep their parameters."""
    active = np.asarray(performance) <= b_t
    updates = []
    for n, prev in enumerate(params):
        mine = np.flatnonzero(assigned == n)
        updates.append(
            ce_update_proposal(
                points[mine], log_weights[mine], active[mine], prev, t,
                eta_schedule=config.eta_schedule, lw_centered=config.lw_centered,
                ess_scope=config.ess_scope,
            )
        )
    return updates


def _draw(rng, params, count):
    points = np.concatenate([mvn_sample(rng, p, count) for p in params])
    origin = np.repeat(np.arange(len(params)), count)
    return points, origin


def run_sais(config, limit_state, rng=None):
    """Run SAIS on ``limit_state`` until the threshold reaches the failure level.

    After the threshold is clamped to ``target_threshold`` one more iteration
    samples from the refitted proposals and then the loop stops. If
    ``max_iterations`` runs out first the result is flagged non-converged.
    """
    config.validate()
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(config.seed if rng is None else rng)
    perf = CountingLimitState(limit_state)
    dim = limit_state.dim
    N, K, rho = config.n_proposals, config.samples_per_proposal, config.rho
    target_b = config.target_threshold
    params = config.initial_proposals(dim, rng)
    jitter_count = 0
    for i, p in enumerate(params):
        cov, _, jittered = regularized_cholesky(p.cov)
        params[i] = ProposalParams(p.mean, cov)
        jitter_count += jittered

    levels = []
    b_prev = np.inf
    final_pending = False
    converged = False
    batch = None
    for t in range(1, config.max_iterations + 1):
        mixture = MixtureProposal(params)
        points, origin = _draw(rng, params, K)
        performance = perf(points)
        log_w = dm_log_weights(points, mixture, limit_state.target)
        estimate = intermediate_failure_estimate(log_w, performance, target_b)
        batch = SampleBatch(points, performance, origin, log_w)
        seeds = select_failure_seeds(performance, origin, N, b_prev)
        seed_counts = np.array([len(s) for s in seeds])

        if final_pending:
            levels.append(SubsetLevel(t, target_b, np.zeros(0, dtype=int), seed_counts, estimate,
                                      np.full(N, np.nan), np.zeros(N, dtype=bool), list(params)))
            converged = True
            break

        elites, _ = select_elites(seeds, performance, rho)
        b_t = adapt_threshold(performance[elites], rho, target_b, config.threshold_order)
        if b_t != target_b and not b_t < b_prev:
            raise RuntimeError(f"threshold failed to decrease at t={t}: {b_t} >= {b_prev}")

        seed_idx = np.concatenate(seeds)
        assigned = reassign_samples(points[seed_idx], mixture)
        batch.assigned[seed_idx] = assigned
        updates = ce_update(points[seed_idx], performance[seed_idx], assigned, log_w[seed_idx],
                            params, b_t, t, config)
        params = [u.params for u in updates]
        jitter_count += sum(u.jittered for u in updates)
        levels.append(SubsetLevel(
            t, b_t, elites, seed_counts, estimate,
            np.array([u.ess for u in updates]),
            np.array([u.tempered for u in updates]),
            list(params),
            np.bincount(assigned, minlength=N),
        ))
        if b_t == target_b:
            final_pending = True
        b_prev = b_t

    if not converged:
        log.warning("SAIS stopped after %d iterations without reaching the failure level",
                    config.max_iterations)
    estimates = np.array([lv.intermediate_estimate for lv in levels])
    alpha = recycling_weights(len(levels), config.forgetting)
    return SaisResult(
        p_f_recycled=float(alpha @ estimates),
        p_f_last_iteration=float(estimates[-1]),
        levels=levels,
        iterations_used=len(levels),
        performance_calls=perf.calls,
        alpha_weights=alpha,
        converged=converged,
        jitter_count=int(jitter_count),
        final_batch=batch,
    )
