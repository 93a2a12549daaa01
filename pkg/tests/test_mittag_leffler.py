from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, erfcx, rgamma

from conftest import ml_reference
from fracinv import mittag_leffler as mlm
from fracinv.mittag_leffler import (
    MLAccuracyError,
    MLDomainError,
    MLParams,
    mittag_leffler,
    ml_eval,
    ml_relax,
    ml_relax_deriv,
)


def test_zero_argument_is_reciprocal_gamma():
    for alpha, beta in [(0.5, 1.0), (1.3, 0.7), (2.0, 2.5)]:
        assert mittag_leffler(alpha, beta, 0.0) == pytest.approx(rgamma(beta), rel=1e-15)


def test_exponential_special_case():
    z = -np.linspace(0.0, 30.0, 31)
    np.testing.assert_allclose(mittag_leffler(1.0, 1.0, z), np.exp(z), rtol=1e-14)


def test_erfc_identity():
    x = np.concatenate([np.linspace(0.0, 6.0, 61), [10.0, 30.0, 100.0]])
    expected = erfcx(x)  # exp(x^2) erfc(x)
    np.testing.assert_allclose(mittag_leffler(0.5, 1.0, -x), expected, rtol=1e-12, atol=1e-15)
    small = x[x < 5]
    np.testing.assert_allclose(
        mittag_leffler(0.5, 1.0, -small), np.exp(small**2) * erfc(small), rtol=1e-11
    )


def test_cosine_identity():
    x = np.linspace(0.0, 20.0, 201)
    np.testing.assert_allclose(mittag_leffler(2.0, 1.0, -(x**2)), np.cos(x), atol=1e-10)
    # E_{2,2}(-x^2) = sin(x) / x
    xs = x[1:]
    np.testing.assert_allclose(mittag_leffler(2.0, 2.0, -(xs**2)), np.sin(xs) / xs, atol=1e-10)


@pytest.mark.parametrize(
    "alpha,beta,z",
    [(0.5, 1.0, -1.0), (0.8, 0.5, -3.0), (1.5, 1.0, -2.5), (0.3, 1.5, -4.0), (1.9, 2.0, -0.5)],
)
def test_against_high_precision_series(alpha, beta, z):
    assert mittag_leffler(alpha, beta, z) == pytest.approx(ml_reference(alpha, beta, z), abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(0.3, 2.0),
    beta=st.floats(0.1, 3.0),
    x=st.floats(0.0, 4.0),
)
def test_random_triples_match_series(alpha, beta, x):
    assert mittag_leffler(alpha, beta, -x) == pytest.approx(
        ml_reference(alpha, beta, -x), abs=1e-11
    )


def test_large_arguments_match_leading_asymptotics():
    # E_{a,b}(-x) ~ 1 / (x Gamma(b - a)) for 0 < a < 1
    for alpha, beta in [(0.3, 1.0), (0.7, 1.2), (0.5, 2.0)]:
        x = 1e8
        assert mittag_leffler(alpha, beta, -x) * x == pytest.approx(rgamma(beta - alpha), rel=1e-6)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
def test_weighted_modulus_plateau(alpha, beta):
    """(1 + |z|) |E(z)| levels off for large |z| (bounded by C / (1 + |z|))."""
    q = [(1.0 + x) * abs(mittag_leffler(alpha, beta, -x)) for x in (1e3, 1e4, 1e5)]
    if rgamma(beta - alpha) == 0.0:
        # leading algebraic term vanishes; the weighted modulus must not grow
        assert q[2] <= 1.05 * q[1] and q[1] <= 1.05 * q[0]
    else:
        assert abs(q[2] / q[1] - 1.0) < 0.05


def _forced(branch, alpha, beta, x):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if branch == "taylor":
        value, ok = mlm._taylor(alpha, beta, x)
        assert ok.all()
        return value
    if branch == "asymptotic":
        value, ok = mlm._asymptotic(alpha, beta, x)
        assert ok.all()
        return value
    return mlm._cut(alpha, beta, x)


@pytest.mark.parametrize("alpha,beta", [(0.5, 1.0), (0.8, 0.8), (1.3, 1.0), (0.6, 2.2)])
def test_branch_agreement_at_switch_points(alpha, beta):
    # series vs contour up to the largest argument the series certifies
    x = np.linspace(0.25, 5.0, 20)
    series, ok = mlm._taylor(alpha, beta, x)
    assert ok[:4].all()
    np.testing.assert_allclose(series[ok], _forced("cut", alpha, beta, x[ok]), atol=1e-12)
    # contour vs expansion where the expansion is first certified
    x = np.array([200.0, 400.0])
    np.testing.assert_allclose(
        _forced("asymptotic", alpha, beta, x), _forced("cut", alpha, beta, x), atol=1e-13
    )


def test_bounded_by_decay_constant():
    x = np.geomspace(1e-3, 1e6, 200)
    for alpha in (0.2, 0.5, 0.9):
        vals = np.abs(mittag_leffler(alpha, 1.0, -x))
        assert np.all(vals * (1.0 + x) <= 1.0 / math.gamma(1.0 - alpha) + 1.5)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 1.0), x1=st.floats(0.0, 1e4), x2=st.floats(0.0, 1e4))
def test_relaxation_is_completely_monotone_proxy(alpha, x1, x2):
    # E_{alpha,1}(-x) is positive and nonincreasing on x >= 0 for 0 < alpha <= 1
    lo, hi = sorted((x1, x2))
    e_lo, e_hi = mittag_leffler(alpha, 1.0, -lo), mittag_leffler(alpha, 1.0, -hi)
    assert e_hi > 0.0
    assert e_hi <= e_lo + 1e-14


def test_vectorized_shapes_and_scalars():
    z = -np.arange(12.0).reshape(3, 4)
    out = mittag_leffler(0.7, 1.0, z)
    assert out.shape == (3, 4)
    assert isinstance(mittag_leffler(0.7, 1.0, -2.0), float)
    assert ml_eval(MLParams(0.7), -2.0) == mittag_leffler(0.7, 1.0, -2.0)


def test_domain_errors():
    with pytest.raises(MLDomainError):
        MLParams(0.0)
    with pytest.raises(MLDomainError):
        MLParams(2.5)
    with pytest.raises(MLDomainError):
        MLParams(0.5, -1.0)
    with pytest.raises(MLDomainError):
        mittag_leffler(0.5, 1.0, 1.0)
    with pytest.raises(MLDomainError):
        mittag_leffler(0.5, 1.0, float("nan"))
    with pytest.raises(MLDomainError):
        ml_relax(1.5, 1.0, 1.0)
    with pytest.raises(MLDomainError):
        ml_relax(0.5, -1.0, 1.0)
    with pytest.raises(MLDomainError):
        ml_relax_deriv(0.5, 1.0, 0.0)


def test_accuracy_error_next_to_unit_order():
    with pytest.raises(MLAccuracyError):
        mittag_leffler(1.0 - 1e-6, 1.0, -20.0)


def test_relaxation_derivative_matches_finite_difference():
    alpha, lam = 0.6, 3.0
    t = np.array([0.05, 0.3, 1.0, 4.0])
    h = 1e-6 * t
    fd = (ml_relax(alpha, lam, t + h) - ml_relax(alpha, lam, t - h)) / (2 * h)
    np.testing.assert_allclose(ml_relax_deriv(alpha, lam, t), fd, rtol=1e-6)


def test_relaxation_broadcasts():
    lam = np.array([1.0, 4.0, 9.0])[:, None]
    t = np.linspace(0.0, 1.0, 5)[None, :]
    out = ml_relax(0.5, lam, t)
    assert out.shape == (3, 5)
    np.testing.assert_allclose(out[:, 0], 1.0)


def test_normalization_grid():
    for alpha in np.linspace(0.1, 1.9, 10):
        for beta in np.linspace(0.1, 3.0, 10):
            assert abs(mittag_leffler(alpha, beta, 0.0) - rgamma(beta)) <= 1e-13


@pytest.mark.parametrize("alpha", np.round(np.arange(0.1, 1.0, 0.1), 1))
def test_strictly_positive_and_decreasing_on_log_grid(alpha):
    x = np.geomspace(1e-6, 1e6, 400)
    e = mittag_leffler(alpha, 1.0, -x)
    assert np.all(e > 0.0)
    assert np.all(np.diff(e) < 0.0)


def test_relaxation_examples():
    assert ml_relax(1.0, 2.0, 1.0) == pytest.approx(math.exp(-2.0), rel=1e-15)
    assert ml_relax(0.3, 7.0, 0.0) == 1.0
    assert ml_relax(0.5, 1.0, 4.0) == pytest.approx(erfcx(2.0), rel=1e-13)
    assert ml_relax_deriv(1.0, 2.0, 1.0) == pytest.approx(-2.0 * math.exp(-2.0), rel=1e-14)
    assert ml_relax_deriv(0.5, 1.0, 1.0) == pytest.approx(
        -ml_reference(0.5, 0.5, -1.0), abs=1e-13
    )
    assert mittag_leffler(2.0, 1.0, -(math.pi**2) / 4.0) == pytest.approx(0.0, abs=1e-14)


def test_derivative_finite_difference_error_is_second_order():
    alpha, lam, t = 0.7, 3.0, 0.5
    exact = ml_relax_deriv(alpha, lam, t)
    errors = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (ml_relax(alpha, lam, t + h) - ml_relax(alpha, lam, t - h)) / (2 * h)
        errors.append(abs(fd - exact))
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    np.testing.assert_allclose(rates, 2.0, atol=0.1)
