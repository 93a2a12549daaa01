from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracinv.forward import (
    ObservationSeries,
    OrderSpectrum,
    TimeGrid,
    initial_value,
    observe,
    solve_multi_modal,
    solve_single_modal,
    solve_spacetime_modal,
)
from fracinv.order_recovery import (
    CONVERGED,
    INSUFFICIENT_HORIZON,
    NON_IDENTIFIABLE,
    UNSTABLE,
    DegenerateDataError,
    MultitermOptions,
    SignChangeError,
    SpaceTimeOrders,
    decreasing_orders,
    decreasing_orders_inverse,
    distinguishability,
    l2_norm,
    lipschitz_ratio,
    recover_alpha_long_time,
    recover_alpha_short_time,
    recover_multiterm,
    recover_spacetime,
)
from fracinv.spectral import build_interval_eigensystem

EIG = build_interval_eigensystem(1.0, 16)
A_SHORT = np.zeros(16)
A_SHORT[:2] = (1.0, 0.5)
X_SHORT = 0.3
PHI1 = np.eye(16)[0]


def short_series(alpha, first=1e-10):
    grid = TimeGrid.logarithmic(1.0, 401, first)
    return observe(solve_single_modal(alpha, A_SHORT, EIG, grid, [X_SHORT]), X_SHORT)


def long_series(alpha, horizon=1e8):
    grid = TimeGrid.logarithmic(horizon, 401, 1e-3)
    return observe(solve_single_modal(alpha, PHI1, EIG, grid, [0.5]), 0.5)


A0 = initial_value(A_SHORT, EIG, X_SHORT)


# {{{ limit formulas

def test_short_time_recovers_order():
    report = recover_alpha_short_time(short_series(0.5), A0)
    assert report.status == CONVERGED
    assert 0.49 <= report.estimates["alpha"] <= 0.51
    assert report.diagnostics["conditioning"] > 0.0
    assert len(report.diagnostics["decades"]) >= 1


def test_short_time_heat_limit():
    report = recover_alpha_short_time(short_series(1.0), A0)
    assert 0.97 <= report.estimates["alpha"] <= 1.0


def test_short_time_constant_series_is_degenerate():
    t = np.geomspace(1e-6, 1.0, 50)
    with pytest.raises(DegenerateDataError):
        recover_alpha_short_time(ObservationSeries(0.5, t, np.full(50, 0.7)), 0.7)


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_long_time_recovers_order(alpha):
    series = long_series(alpha)
    # the protocol's decay requirement
    assert series.h[-1] < 0.05 * series.h[0]
    report = recover_alpha_long_time(series)
    assert report.status == CONVERGED
    assert abs(report.estimates["alpha"] - alpha) <= 0.02


def test_long_time_heat_has_no_plateau():
    grid = TimeGrid.logarithmic(2.0, 200, 1e-3)
    series = observe(solve_single_modal(1.0, PHI1, EIG, grid, [0.5]), 0.5)
    report = recover_alpha_long_time(series)
    assert report.status in (UNSTABLE, INSUFFICIENT_HORIZON)
    assert math.isnan(report.estimates["alpha"])


def test_long_time_short_horizon():
    grid = TimeGrid.logarithmic(1e-2, 100, 1e-5)
    series = observe(solve_single_modal(0.5, PHI1, EIG, grid, [0.5]), 0.5)
    assert recover_alpha_long_time(series).status == INSUFFICIENT_HORIZON


def test_long_time_sign_change():
    t = np.geomspace(1.0, 100.0, 40)
    with pytest.raises(SignChangeError):
        recover_alpha_long_time(ObservationSeries(0.5, t, np.cos(t)))


def test_short_and_long_time_agree():
    # both limits on the same single-term dataset (long horizon, refined start)
    grid = TimeGrid.logarithmic(1e8, 801, 1e-10)
    series = observe(solve_single_modal(0.5, A_SHORT, EIG, grid, [X_SHORT]), X_SHORT)
    short = recover_alpha_short_time(series, A0).estimates["alpha"]
    long = recover_alpha_long_time(series).estimates["alpha"]
    assert abs(short - long) < 0.04


def test_scale_invariance_examples():
    s = short_series(0.5, first=1e-8)
    l = long_series(0.5)
    for c in (3.7, 0.013, 1e3):
        assert recover_alpha_short_time(
            ObservationSeries(s.x0, s.t, c * s.h), c * A0
        ).estimates["alpha"] == pytest.approx(
            recover_alpha_short_time(s, A0).estimates["alpha"], abs=1e-12
        )
        assert recover_alpha_long_time(
            ObservationSeries(l.x0, l.t, c * l.h)
        ).estimates["alpha"] == pytest.approx(
            recover_alpha_long_time(l).estimates["alpha"], abs=1e-12
        )


_SCALE_SHORT = short_series(0.4, first=1e-8)
_SCALE_LONG = long_series(0.4)


@settings(max_examples=15, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_scale_invariance_property(c):
    s, l = _SCALE_SHORT, _SCALE_LONG
    base_s = recover_alpha_short_time(s, A0).estimates["alpha"]
    base_l = recover_alpha_long_time(l).estimates["alpha"]
    got_s = recover_alpha_short_time(ObservationSeries(s.x0, s.t, c * s.h), c * A0)
    got_l = recover_alpha_long_time(ObservationSeries(l.x0, l.t, c * l.h))
    assert abs(got_s.estimates["alpha"] - base_s) <= 1e-12
    assert abs(got_l.estimates["alpha"] - base_l) <= 1e-12


def _median_error(method, level, alpha=0.5, trials=16):
    base = long_series(alpha) if method == "long" else short_series(alpha)
    errors = []
    for seed in range(trials):
        rng = np.random.default_rng(seed)
        h = base.h * (1.0 + level * rng.standard_normal(base.h.size))
        noisy = ObservationSeries(base.x0, base.t, h)
        try:
            if method == "long":
                report = recover_alpha_long_time(noisy)
            else:
                report = recover_alpha_short_time(noisy, A0)
        except (DegenerateDataError, SignChangeError):
            report = None
        # a refusal counts as the largest possible error on (0, 1)
        if report is None or not report.converged:
            errors.append(1.0)
        else:
            errors.append(abs(report.estimates["alpha"] - alpha))
    return float(np.median(errors))


@pytest.mark.parametrize("method", ["short", "long"])
def test_noise_degradation_is_monotone(method):
    errors = [_median_error(method, level) for level in (0.0, 1e-3, 1e-2)]
    assert errors[0] < 0.01
    assert errors[0] <= errors[1] <= errors[2]


# }}}


# {{{ space-time

def spacetime_series(alpha, gamma):
    a = 1.0 / np.arange(1, 17) ** 2
    grid = TimeGrid.logarithmic(1e8, 401, 1e-3)
    # data on a richer spectrum than the inversion model
    eig_data = build_interval_eigensystem(1.0, 32)
    a_data = 1.0 / np.arange(1, 33) ** 2
    series = observe(solve_spacetime_modal(alpha, gamma, a_data, eig_data, grid, [0.5]), 0.5)
    return series, a


def test_spacetime_recovery():
    series, a = spacetime_series(0.5, 1.2)
    report = recover_spacetime(series, EIG, a)
    assert report.status == CONVERGED
    assert abs(report.estimates["alpha"] - 0.5) <= 0.02
    assert abs(report.estimates["gamma"] - 1.2) <= 0.02
    SpaceTimeOrders(report.estimates["alpha"], report.estimates["gamma"])


def test_spacetime_classical_laplacian():
    series, a = spacetime_series(0.5, 2.0)
    report = recover_spacetime(series, EIG, a)
    assert 1.97 <= report.estimates["gamma"] < 2.0
    single = recover_alpha_long_time(series).estimates["alpha"]
    assert report.estimates["alpha"] == pytest.approx(single, abs=1e-12)


def test_spacetime_zero_series():
    t = np.geomspace(1e-3, 1e8, 100)
    with pytest.raises(DegenerateDataError):
        recover_spacetime(ObservationSeries(0.5, t, np.zeros(100)), EIG, np.zeros(16))


def test_spacetime_orders_validation():
    with pytest.raises(ValueError):
        SpaceTimeOrders(1.0, 1.0)
    with pytest.raises(ValueError):
        SpaceTimeOrders(0.5, 2.0)


# }}}


# {{{ multi-term

@settings(max_examples=50, deadline=None)
@given(s=st.lists(st.floats(-8.0, 8.0), min_size=1, max_size=4))
def test_decreasing_transform(s):
    alphas = decreasing_orders(np.array(s))
    assert np.all((alphas > 0.0) & (alphas < 1.0))
    assert np.all(np.diff(alphas) < 0.0)
    np.testing.assert_allclose(decreasing_orders_inverse(alphas), s, atol=1e-6)


def test_single_term_multiterm_matches_short_time():
    grid = TimeGrid.graded(1.0, 128, 2.5)
    series = observe(solve_single_modal(0.5, A_SHORT, EIG, grid, [X_SHORT]), X_SHORT)
    report = recover_multiterm(series, 1, EIG, A_SHORT, MultitermOptions(starts=4))
    short = recover_alpha_short_time(short_series(0.5), A0).estimates["alpha"]
    assert report.status == CONVERGED
    assert abs(report.estimates["alphas"][0] - short) <= 0.02
    assert report.estimates["p"][0] > 0.0


def test_zero_data_is_non_identifiable():
    t = TimeGrid.uniform(1.0, 32).t[1:]
    report = recover_multiterm(ObservationSeries(0.5, t, np.zeros(32)), 2, EIG, np.zeros(16),
                               MultitermOptions(starts=2, max_evals=200))
    assert report.status == NON_IDENTIFIABLE


def test_multiterm_deterministic_across_threads(monkeypatch):
    grid = TimeGrid.graded(1.0, 64, 2.5)
    a = np.eye(16)[0]
    series = observe(
        solve_multi_modal(OrderSpectrum((0.8, 0.4), (1.0, 0.5)), a, EIG, grid.refine(2), [0.4]),
        0.4,
    )
    series = ObservationSeries(0.4, series.t[1::2], series.h[1::2])
    opts = MultitermOptions(starts=4, max_evals=300)
    monkeypatch.setenv("FRACINV_THREADS", "1")
    serial = recover_multiterm(series, 2, EIG, a, opts)
    monkeypatch.setenv("FRACINV_THREADS", "3")
    threaded = recover_multiterm(series, 2, EIG, a, opts)
    assert serial.estimates == threaded.estimates
    alphas = serial.estimates["alphas"]
    assert 1.0 > alphas[0] > alphas[1] > 0.0


def test_multiterm_validation():
    t = np.linspace(0.1, 1.0, 10)
    with pytest.raises(ValueError):
        recover_multiterm(ObservationSeries(0.5, t, t), 0, EIG, PHI1)


# }}}


# {{{ stability experiments

GRID = TimeGrid.uniform(1.0, 128)


def test_lipschitz_skips_identical_pairs():
    worst, ratios = lipschitz_ratio([((0.5, 1.0), (0.5, 1.0))], PHI1, EIG, GRID, 0.5)
    assert ratios == [] and math.isnan(worst)


def test_lipschitz_ratios_stabilize():
    pairs = [((0.5, 1.0), (0.5 + 2.0**-k, 1.0)) for k in range(4, 11)]
    worst, ratios = lipschitz_ratio(pairs, PHI1, EIG, GRID, 0.5)
    assert worst == max(ratios)
    assert max(ratios) / min(ratios) < 3.0
    pairs = [((0.5, 1.0), (0.5, 1.0 + 2.0**-k)) for k in range(4, 11)]
    _, ratios = lipschitz_ratio(pairs, PHI1, EIG, GRID, 0.5)
    assert max(ratios) / min(ratios) < 3.0


def test_distinguishability_examples():
    assert distinguishability((0.5, 1.0), (0.6, 1.0), PHI1, EIG, GRID, 0.5) > 1e-4
    assert distinguishability((0.5, 1.0), (0.5, 1.0), PHI1, EIG, GRID, 0.5) < 1e-10
    small = distinguishability((0.5, 1.0), ((0.5, 0.1), (1.0, 1e-3)), PHI1, EIG, GRID, 0.5)
    assert 0.0 < small < 1e-2


def test_l2_norm():
    t = np.linspace(0.01, 1.0, 100)
    assert l2_norm(t, np.ones(100)) == pytest.approx(1.0, abs=1e-2)
    assert l2_norm(t, np.zeros(100)) == 0.0


# }}}
