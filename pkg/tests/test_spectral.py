from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracinv.spectral import (
    AliasingWarning,
    DomainSpec,
    build_interval_eigensystem,
    fractional_eigenvalues,
    project,
    quadrature_rule,
    synthesize,
)


def test_eigenvalues_and_orthonormality():
    eig = build_interval_eigensystem(2.0, 12)
    np.testing.assert_allclose(eig.eigenvalues, (np.arange(1, 13) * math.pi / 2.0) ** 2)
    x, w = quadrature_rule(2.0, 256)
    phi = eig.eigenfunctions(x)
    np.testing.assert_allclose(phi @ (w[:, None] * phi.T), np.eye(12), atol=1e-13)


def test_eigenfunctions_satisfy_boundary_conditions():
    eig = build_interval_eigensystem(1.5, 8)
    np.testing.assert_allclose(eig.eigenfunctions([0.0, 1.5]), 0.0, atol=1e-14)


def test_quadrature_integrates_polynomials():
    x, w = quadrature_rule(3.0, 64)
    assert w.sum() == pytest.approx(3.0, rel=1e-15)
    assert np.sum(w * x**5) == pytest.approx(3.0**6 / 6.0, rel=1e-13)


def test_projection_of_single_mode():
    eig = build_interval_eigensystem(1.0, 10)
    a = project(lambda x: math.sqrt(2.0) * np.sin(3 * math.pi * x), eig)
    expected = np.zeros(10)
    expected[2] = 1.0
    np.testing.assert_allclose(a, expected, atol=1e-14)


def test_projection_of_polynomial_closed_form():
    # (x(1-x), phi_n) = 4 sqrt(2) / (n pi)^3 for odd n, 0 for even n
    eig = build_interval_eigensystem(1.0, 15)
    a = project(lambda x: x * (1.0 - x), eig)
    n = eig.modes
    expected = np.where(n % 2 == 1, 4.0 * math.sqrt(2.0) / (n * math.pi) ** 3, 0.0)
    np.testing.assert_allclose(a, expected, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(coeffs=st.lists(st.floats(-5.0, 5.0), min_size=1, max_size=20))
def test_project_synthesize_roundtrip(coeffs):
    eig = build_interval_eigensystem(1.0, len(coeffs))
    a = np.asarray(coeffs)
    back = project(lambda x: synthesize(a, eig, x), eig)
    np.testing.assert_allclose(back, a, atol=1e-12)


def test_synthesize_trailing_axes():
    eig = build_interval_eigensystem(1.0, 4)
    coeffs = np.ones((4, 7))
    out = synthesize(coeffs, eig, np.linspace(0.1, 0.9, 5))
    assert out.shape == (5, 7)
    with pytest.raises(ValueError):
        synthesize(np.ones(3), eig, [0.5])


def test_fractional_eigenvalues():
    eig = build_interval_eigensystem(1.0, 6)
    np.testing.assert_allclose(fractional_eigenvalues(eig, 2.0), eig.eigenvalues)
    np.testing.assert_allclose(fractional_eigenvalues(eig, 1.0), eig.modes * math.pi)
    for bad in (0.0, -1.0, 2.5):
        with pytest.raises(ValueError):
            fractional_eigenvalues(eig, bad)


def test_aliasing_warning():
    eig = build_interval_eigensystem(1.0, 64)
    with pytest.warns(AliasingWarning):
        project(lambda x: x, eig, quad_points=100)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        project(lambda x: x, eig)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        DomainSpec(-1.0)
    with pytest.raises(ValueError):
        DomainSpec(1.0, dim=2)
    with pytest.raises(ValueError):
        build_interval_eigensystem(1.0, 0)
    eig = build_interval_eigensystem(1.0, 4)
    with pytest.raises(ValueError):
        project(lambda x: np.full_like(x, np.nan), eig)


def test_closed_form_examples():
    assert build_interval_eigensystem(1.0, 1).eigenvalues[0] == pytest.approx(math.pi**2)
    np.testing.assert_allclose(build_interval_eigensystem(math.pi, 3).eigenvalues, [1, 4, 9])
    assert np.all(np.diff(build_interval_eigensystem(1.0, 50).eigenvalues) > 0)
    np.testing.assert_allclose(
        fractional_eigenvalues(build_interval_eigensystem(math.pi, 4), 1.0), [1, 2, 3, 4]
    )
    assert fractional_eigenvalues(build_interval_eigensystem(1.0, 2), 0.8)[1] == pytest.approx(
        (4 * math.pi**2) ** 0.4, rel=1e-15
    )
    eig = build_interval_eigensystem(1.0, 8)
    assert synthesize(np.eye(8)[0], eig, [0.5])[0] == pytest.approx(math.sqrt(2.0))
    np.testing.assert_array_equal(project(lambda x: np.zeros_like(x), eig), 0.0)


def test_pointwise_round_trip_of_mode():
    eig = build_interval_eigensystem(1.0, 10)
    phi3 = lambda x: math.sqrt(2.0) * np.sin(3 * math.pi * x)
    x = np.linspace(0.0, 1.0, 201)
    np.testing.assert_allclose(synthesize(project(phi3, eig), eig, x), phi3(x), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(c=st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3), shift=st.floats(0.0, 1.0))
def test_smooth_function_round_trip(c, shift):
    # smooth odd periodic extension, so the sine series converges spectrally;
    # x(1-x)-type profiles only give algebraic decay of the coefficients
    f = lambda x: np.sin(np.pi * x) * (
        c[0] + c[1] * np.exp(shift * np.cos(2 * np.pi * x)) + c[2] * np.cos(np.pi * x) ** 3
    )
    eig = build_interval_eigensystem(1.0, 64)
    x = np.linspace(0.0, 1.0, 301)
    assert np.max(np.abs(synthesize(project(f, eig), eig, x) - f(x))) < 1e-6
