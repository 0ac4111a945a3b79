import numpy as np
import pytest
from scipy.stats import multivariate_normal

from rare_sais.errors import (
    AllZeroWeights,
    DimensionMismatch,
    EmptyInput,
    NotPositiveDefinite,
    ZeroDenominator,
)
from rare_sais.numkernel import (
    BETA_FLOOR,
    ProposalParams,
    cholesky,
    log_sum_exp,
    lw_shrinkage_coefficient,
    mvn_logpdf,
    mvn_sample,
    regularized_cholesky,
    shrink_covariance,
    weighted_covariance,
    weighted_mean,
)

LN2PI = np.log(2 * np.pi)
# oracle: scalar-loop shrinkage coefficient for default_rng(2024), 200 draws of N(0, diag(1, 3))
LW_FROZEN = 0.08393765412857042


def lw_reference(samples, s_hat):
    """Scalar loops over the shrinkage formula, written independently of the library."""
    k, d = len(samples), len(samples[0])
    num = 0.0
    for x in samples:
        for i in range(d):
            for j in range(d):
                num += (x[i] * x[j] - s_hat[i][j]) ** 2
    tr = sum(s_hat[i][i] for i in range(d))
    tr_sq = sum(s_hat[i][j] * s_hat[j][i] for i in range(d) for j in range(d))
    return num / (k * k * (tr_sq - tr * tr / d))


# cholesky

def test_cholesky_identity():
    np.testing.assert_array_equal(cholesky(np.eye(2)), np.eye(2))


def test_cholesky_diagonal():
    np.testing.assert_allclose(cholesky([[4.0, 0.0], [0.0, 9.0]]), [[2.0, 0.0], [0.0, 3.0]])


def test_cholesky_reconstructs():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    L = cholesky(m)
    assert np.allclose(np.triu(L, 1), 0.0)
    np.testing.assert_allclose(L @ L.T, m, rtol=1e-10)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky([[1.0, 2.0], [2.0, 1.0]])


def test_cholesky_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        cholesky(np.ones((2, 3)))


def test_regularized_cholesky_jitters_singular_psd():
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    used, L, jittered = regularized_cholesky(cov)
    assert jittered
    np.testing.assert_allclose(used, cov + 1e-8 * np.eye(2))
    np.testing.assert_allclose(L @ L.T, used)


def test_regularized_cholesky_second_failure_propagates():
    with pytest.raises(NotPositiveDefinite):
        regularized_cholesky(np.array([[1.0, 0.0], [0.0, -1.0]]))


# mvn_logpdf

@pytest.mark.parametrize("x, mean, expected", [
    ([0.0], [0.0], -0.5 * LN2PI),
    ([0.0, 0.0], [0.0, 0.0], -LN2PI),
    ([1.0, 1.0], [0.0, 0.0], -LN2PI - 1.0),
])
def test_mvn_logpdf_standard(x, mean, expected):
    p = ProposalParams(mean, np.eye(len(mean)))
    assert mvn_logpdf(np.array(x), p) == pytest.approx(expected, abs=1e-12)


def test_mvn_logpdf_matches_scipy():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    cov = a @ a.T + 4 * np.eye(4)
    mean = rng.standard_normal(4)
    x = rng.standard_normal((50, 4))
    expected = multivariate_normal(mean, cov).logpdf(x)
    np.testing.assert_allclose(mvn_logpdf(x, ProposalParams(mean, cov)), expected, rtol=1e-12)


def test_mvn_logpdf_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        mvn_logpdf(np.zeros(3), ProposalParams(np.zeros(2), np.eye(2)))


def test_proposal_params_shape_check():
    with pytest.raises(DimensionMismatch):
        ProposalParams(np.zeros(2), np.eye(3))


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_mvn_logpdf_integrates_to_one(sigma):
    grid = np.linspace(-12 * sigma, 12 * sigma, 20001)
    dens = np.exp(mvn_logpdf(grid[:, None], ProposalParams([0.0], [[sigma**2]])))
    assert np.trapezoid(dens, grid) == pytest.approx(1.0, abs=1e-4)


# mvn_sample

def test_mvn_sample_narrow():
    p = ProposalParams([5.0, 5.0], 1e-12 * np.eye(2))
    x = mvn_sample(np.random.default_rng(0), p, 1000)
    assert np.all(np.abs(x - 5.0) < 1e-4)


def test_mvn_sample_moments():
    x = mvn_sample(np.random.default_rng(1), ProposalParams(np.zeros(2), np.eye(2)), 10**6)
    assert np.all(np.abs(x.mean(axis=0)) < 0.01)
    assert np.all(np.abs(np.cov(x.T) - np.eye(2)) < 0.02)


def test_mvn_sample_deterministic():
    p = ProposalParams([1.0, -1.0], [[2.0, 0.5], [0.5, 1.0]])
    a = mvn_sample(np.random.default_rng(7), p, 100)
    b = mvn_sample(np.random.default_rng(7), p, 100)
    np.testing.assert_array_equal(a, b)


# log_sum_exp

def test_log_sum_exp_examples():
    assert log_sum_exp([0.0, 0.0]) == pytest.approx(np.log(2))
    assert log_sum_exp([-1000.0, -1000.0]) == pytest.approx(-1000 + np.log(2))
    assert log_sum_exp([0.0]) == 0.0


def test_log_sum_exp_all_neg_inf():
    assert log_sum_exp([-np.inf, -np.inf]) == -np.inf


def test_log_sum_exp_empty():
    with pytest.raises(EmptyInput):
        log_sum_exp([])


def test_log_sum_exp_axis():
    v = np.array([[0.0, 0.0], [1.0, -np.inf]])
    np.testing.assert_allclose(log_sum_exp(v, axis=1), [np.log(2), 1.0])


# weighted moments

def test_weighted_mean_examples():
    np.testing.assert_allclose(weighted_mean([[0, 0], [2, 2]], [1, 1]), [1, 1])
    np.testing.assert_allclose(weighted_mean([[3, 3], [9, 9]], [1, 0]), [3, 3])
    np.testing.assert_allclose(weighted_mean([0.0, 4.0], [1, 3]), [3.0])


def test_weighted_mean_zero_weights():
    with pytest.raises(AllZeroWeights):
        weighted_mean([[1.0], [2.0]], [0.0, 0.0])


def test_weighted_mean_length_mismatch():
    with pytest.raises(DimensionMismatch):
        weighted_mean([[1.0], [2.0]], [1.0])


def test_weighted_covariance_examples():
    np.testing.assert_array_equal(weighted_covariance([[1.0, 2.0]], [1.0], [1.0, 2.0]),
                                  np.zeros((2, 2)))
    np.testing.assert_allclose(weighted_covariance([[-1.0], [1.0]], [1, 1], [0.0]), [[1.0]])


def test_weighted_covariance_uses_given_center():
    # second moment about 1, not about the weighted mean 0
    np.testing.assert_allclose(weighted_covariance([[-1.0], [1.0]], [1, 1], [1.0]), [[2.0]])


def test_weighted_covariance_mc_consistency():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((10**5, 2)) * np.array([1.0, 2.0])
    cov = weighted_covariance(x, np.ones(len(x)), np.zeros(2))
    np.testing.assert_allclose(np.diag(cov), [1.0, 4.0], rtol=0.05)


def test_weighted_covariance_zero_weights():
    with pytest.raises(AllZeroWeights):
        weighted_covariance([[1.0]], [0.0], [0.0])


# shrinkage coefficient

def test_lw_matches_scalar_reference():
    rng = np.random.default_rng(2024)
    x = rng.standard_normal((200, 2)) * np.sqrt([1.0, 3.0])
    s_hat = np.cov(x.T, bias=True)
    ref = lw_reference(x.tolist(), s_hat.tolist())
    assert 0 < ref <= 1
    assert lw_shrinkage_coefficient(x, s_hat) == pytest.approx(ref, rel=1e-12)


def test_lw_frozen_value():
    # frozen value of the scalar reference for this fixed stream
    rng = np.random.default_rng(2024)
    x = rng.standard_normal((200, 2)) * np.sqrt([1.0, 3.0])
    s_hat = np.cov(x.T, bias=True)
    assert lw_shrinkage_coefficient(x, s_hat) == pytest.approx(LW_FROZEN, rel=1e-10)


def test_lw_zero_dispersion_hits_floor():
    # x x^T equals s_hat for every sample -> numerator 0
    x = np.array([[1.0, 2.0]] * 5)
    s_hat = np.outer(x[0], x[0])
    assert lw_shrinkage_coefficient(x, s_hat) == BETA_FLOOR


def test_lw_one_dimensional_is_zero_denominator():
    with pytest.raises(ZeroDenominator):
        lw_shrinkage_coefficient(np.array([[1.0], [2.0]]), np.array([[2.5]]))


def test_lw_isotropic_is_zero_denominator():
    with pytest.raises(ZeroDenominator):
        lw_shrinkage_coefficient(np.eye(2), np.eye(2))


def test_lw_clamped_above():
    rng = np.random.default_rng(5)
    x = 10 * rng.standard_normal((3, 2))
    s_hat = np.diag([0.1, 0.2])
    assert lw_shrinkage_coefficient(x, s_hat) == 1.0


def test_lw_centered_option():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((50, 2)) + 3.0
    s_hat = np.diag([1.0, 2.0])
    c = np.array([3.0, 3.0])
    assert lw_shrinkage_coefficient(x, s_hat, c) == pytest.approx(
        min(lw_reference((x - c).tolist(), s_hat.tolist()), 1.0))


# shrink_covariance

def test_shrink_full_replacement():
    s_hat = np.diag([2.0, 4.0])
    np.testing.assert_array_equal(shrink_covariance(np.eye(2), s_hat, 1.0, 0.0), s_hat)


def test_shrink_inertia_limit():
    out = shrink_covariance(np.eye(2), np.diag([2.0, 4.0]), BETA_FLOOR, 0.0)
    np.testing.assert_allclose(out, np.eye(2), atol=1e-7)


def test_shrink_arithmetic():
    out = shrink_covariance(np.eye(2), np.diag([2.0, 4.0]), 0.5, 0.1)
    np.testing.assert_allclose(out, np.diag([1.8, 2.8]))


def test_shrink_rejects_bad_args():
    with pytest.raises(DimensionMismatch):
        shrink_covariance(np.eye(2), np.eye(3), 0.5, 0.1)
    with pytest.raises(ValueError):
        shrink_covariance(np.eye(2), np.eye(2), 0.0, 0.1)
    with pytest.raises(ValueError):
        shrink_covariance(np.eye(2), np.eye(2), 0.5, -1.0)

