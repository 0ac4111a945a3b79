import numpy as np
import pytest
from scipy.stats import norm

from rare_sais import baselines
from rare_sais.baselines import ce_pmc, crude_mc, ss_is
from rare_sais.errors import DegenerateMixture, NoFailureSamples
from rare_sais.limitstate import LimitState, get_limit_state

P4 = norm.cdf(-3.5)


def constant_state(value, dim=2):
    return LimitState("const", dim, {}, None, lambda x: np.full(len(np.atleast_2d(x)), value))


# crude Monte Carlo

def test_crude_mc_trivial():
    assert crude_mc(constant_state(1.0), 1000, 0).estimate == 0.0
    res = crude_mc(constant_state(-1.0), 1000, 0)
    assert res.estimate == 1.0 and res.std_error == 0.0


def test_crude_mc_s4_within_three_se():
    res = crude_mc(get_limit_state("s4", dim=10), 10**7, np.random.default_rng(17))
    assert abs(res.estimate - P4) < 3 * res.std_error


def test_crude_mc_blocks_and_determinism():
    ls = get_limit_state("s1")
    a = crude_mc(ls, 25_000, np.random.default_rng(1), block_size=10_000)
    b = crude_mc(ls, 25_000, np.random.default_rng(1), block_size=10_000)
    assert a == b and a.samples == 25_000


def test_crude_mc_rejects_zero_samples():
    with pytest.raises(ValueError):
        crude_mc(constant_state(1.0), 0)


# SS-IS

def test_ss_is_low_dimension_adequate():
    ls = get_limit_state("s4", dim=2)
    hits = sum(P4 / 2 < ss_is(ls, 2000, rng=np.random.default_rng(r)).estimate < 2 * P4
               for r in range(50))
    assert hits >= 40


def test_ss_is_covariance_never_changes():
    res = ss_is(get_limit_state("s1"), 300, rng=np.random.default_rng(3))
    first = res.trace[0]["cov"]
    for level in res.trace:
        np.testing.assert_array_equal(level["cov"], first)


def test_ss_is_relocates_to_most_probable_level_sample():
    res = ss_is(get_limit_state("s4", dim=2), 500, rng=np.random.default_rng(4))
    assert res.converged
    np.testing.assert_array_equal(res.trace[0]["mean"], [0.0, 0.0])
    assert len(res.trace) == len(res.thresholds) == res.iterations


def test_ss_is_ratio_product_option():
    ls = get_limit_state("s4", dim=2)
    est = [ss_is(ls, 2000, rng=np.random.default_rng(r), estimator="ratio_product").estimate
           for r in range(20)]
    assert P4 / 2 < np.mean(est) < 2 * P4


def test_ss_is_no_failure_samples():
    calls = []

    def drifting(x):
        # every new level sees larger performances than the last threshold
        calls.append(1)
        return np.full(len(x), float(len(calls)))

    with pytest.raises(NoFailureSamples):
        ss_is(LimitState("drift", 2, {}, None, drifting), 100, rng=np.random.default_rng(0))


def test_ss_is_high_dimension_underestimates():
    ls = get_limit_state("s4", dim=60)
    est = [ss_is(ls, 3000, rho=0.2, rng=np.random.default_rng(r)).estimate for r in range(10)]
    assert np.mean(est) < P4 / 10


@pytest.mark.xfail(strict=True, reason="this SS-IS stays accurate on S3; the reported "
                   "divergence to about 0.8 is not reproduced")
def test_ss_is_s3_diverges():
    ls = get_limit_state("s3")
    est = np.mean([ss_is(ls, 200, rng=np.random.default_rng(r)).estimate for r in range(20)])
    assert est > 0.5


def test_ss_is_deterministic():
    ls = get_limit_state("s2")
    a = ss_is(ls, 500, rng=np.random.default_rng(9))
    b = ss_is(ls, 500, rng=np.random.default_rng(9))
    assert a.estimate == b.estimate and a.thresholds == b.thresholds


# CE-PMC

def test_ce_pmc_well_placed_single_component():
    ls = get_limit_state("s4", dim=2)
    start = np.full((1, 2), 3.5 / np.sqrt(2))
    est = np.array([ce_pmc(ls, 1, 1000, rho=0.2, initial_means=start,
                           rng=np.random.default_rng(r)).estimate for r in range(100)])
    se = est.std(ddof=1) / np.sqrt(len(est))
    assert abs(est.mean() - P4) < 3 * se


def test_ce_pmc_s3_many_components():
    ls = get_limit_state("s3")
    est = np.mean([ce_pmc(ls, 30, 200, rng=np.random.default_rng(r)).estimate for r in range(10)])
    assert est == pytest.approx(7.29e-2, rel=0.1)


@pytest.mark.xfail(strict=True, reason="this CE-PMC is markedly better on S2 than the "
                   "reported RRMSE of about 1.8")
def test_ce_pmc_s2_poor():
    ls = get_limit_state("s2")
    est = np.array([ce_pmc(ls, 6, 200, rng=np.random.default_rng(r)).estimate for r in range(50)])
    assert np.sqrt(np.mean((est - 6.4e-5) ** 2)) / 6.4e-5 > 0.9


def test_ce_pmc_deterministic_and_counts_calls():
    ls = get_limit_state("s1")
    a = ce_pmc(ls, 4, 100, rng=np.random.default_rng(2))
    b = ce_pmc(ls, 4, 100, rng=np.random.default_rng(2))
    assert a.estimate == b.estimate
    assert a.performance_calls == a.iterations * 400


def test_ce_pmc_self_normalized_option():
    res = ce_pmc(get_limit_state("s4", dim=2), 2, 500, rho=0.2, init_box=(-1, 1),
                 rng=np.random.default_rng(0), estimator="self_normalized")
    assert 0.0 <= res.estimate <= 1.0
    with pytest.raises(ValueError):
        ce_pmc(get_limit_state("s1"), estimator="other")


def test_ce_pmc_degenerate_mixture(monkeypatch):
    monkeypatch.setattr(baselines, "dm_log_weights", lambda x, mix, target: np.full(len(x), -np.inf))
    with pytest.raises(DegenerateMixture):
        ce_pmc(get_limit_state("s1"), 2, 50, rng=np.random.default_rng(0))
