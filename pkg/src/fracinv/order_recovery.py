"""Recovery of fractional orders from a single-point time series.

* short-time limit: ``t u_t / (u - a(x0)) -> alpha`` as ``t -> 0``;
* long-time limit: ``-t u_t / u -> alpha`` as ``t -> infinity``;
* space-time pair ``(alpha, gamma)``: long-time ``alpha`` followed by a
  golden-section search for ``gamma``;
* multi-term ``(alpha, p)``: multi-start Nelder-Mead on the L2 misfit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import expit, logit
from scipy.stats import qmc

from fracinv.forward import (
    L1Weights,
    ObservationSeries,
    OrderSpectrum,
    TimeGrid,
    caputo_l1_weights,
    solve_multi_modal,
    solve_spacetime_modal,
)
from fracinv.spectral import EigenSystem

CONVERGED = "converged"
UNSTABLE = "extrapolation-unstable"
STALLED = "optimizer-stalled"
INSUFFICIENT_HORIZON = "insufficient-horizon"
NON_IDENTIFIABLE = "non-identifiable"
FLAT_OBJECTIVE = "flat-objective"


THREADS_ENV = "FRACINV_THREADS"


def thread_count() -> int:
    """Worker threads for independent multi-start runs (``FRACINV_THREADS``, default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


class RecoveryError(ValueError):
    pass


class DegenerateDataError(RecoveryError):
    """The data carries no information about the sought quantity."""


class SignChangeError(RecoveryError):
    pass


@dataclass
class RecoveryReport:
    estimates: dict[str, Any]
    status: str
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def summary(self) -> str:
        lines = [f"status: {self.status}"]
        for key, value in self.estimates.items():
            lines.append(f"{key}: {_fmt(value)}")
        return "\n".join(lines)


def _fmt(value) -> str:
    if isinstance(value, (tuple, list, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class SpaceTimeOrders:
    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.gamma < 2.0:
            raise ValueError(f"gamma must lie in (0, 2), got {self.gamma}")


def l2_norm(t: np.ndarray, v: np.ndarray) -> float:
    """Trapezoidal L2(0, T) norm of samples ``v`` at ``t``, taking ``v(0) = 0``."""
    t = np.concatenate([[0.0], t])
    v = np.concatenate([[0.0], v])
    return math.sqrt(max(np.trapezoid(v * v, t), 0.0))


# {{{ limit formulas


def _log_derivative(t: np.ndarray, h: np.ndarray) -> np.ndarray:
    # t u_t = du / d(log t); second-order differences on (possibly) non-uniform log spacing
    return np.gradient(h, np.log(t), edge_order=2)


def _fit_power(t: np.ndarray, r: np.ndarray, sign: float, alpha0: float) -> tuple[float, float, float]:
    """Fit ``r = alpha + c t^(sign alpha)``; returns ``(alpha, c, rms)``."""
    s = t ** sign

    def model(theta):
        alpha = expit(theta[0])
        return alpha, theta[1], alpha + theta[1] * s**alpha

    def objective(theta):
        return float(np.mean((model(theta)[2] - r) ** 2))

    alpha0 = float(np.clip(alpha0, 1.0e-3, 1.0 - 1.0e-3))
    ta = s**alpha0
    c0 = float(np.dot(ta, r - alpha0) / max(np.dot(ta, ta), 1.0e-300))
    res = minimize(
        objective,
        np.array([logit(alpha0), c0]),
        method="Nelder-Mead",
        options={"xatol": 1.0e-10, "fatol": 1.0e-20, "maxiter": 4000, "maxfev": 8000},
    )
    def rms(alpha: float, c: float) -> float:
        return math.sqrt(float(np.mean((alpha + c * s**alpha - r) ** 2)))

    alpha, c, _ = model(res.x)
    alpha, c = float(alpha), float(c)
    polished = _polish_power(s, r, alpha)
    c_polished = _best_c(s, r, polished)
    # keep the simplex answer when the optimum sits on the boundary (no interior root)
    if rms(polished, c_polished) <= rms(alpha, c) * (1.0 + 1.0e-9):
        alpha, c = polished, c_polished
    return alpha, c, rms(alpha, c)


def _best_c(s: np.ndarray, r: np.ndarray, alpha: float) -> float:
    sa = s**alpha
    return float(np.dot(sa, r - alpha) / max(np.dot(sa, sa), 1.0e-300))


def _polish_power(s: np.ndarray, r: np.ndarray, alpha: float) -> float:
    """Refine ``alpha`` by a root of the envelope derivative (``c`` eliminated).

    Root-finding pins the stationary point to rounding level, so the result does
    not inherit the simplex tolerance (and is invariant under data scaling).
    """
    log_s = np.log(s)

    def slope(a: float) -> float:
        c = _best_c(s, r, a)
        sa = s**a
        return float(np.dot(r - a - c * sa, 1.0 + c * sa * log_s))

    lo, hi = alpha, alpha
    step = 1.0e-4
    for _ in range(20):
        lo, hi = max(lo - step, 1.0e-6), min(hi + step, 1.0 - 1.0e-9)
        f_lo, f_hi = slope(lo), slope(hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if np.sign(f_lo) != np.sign(f_hi):
            return float(brentq(slope, lo, hi, xtol=1.0e-15, rtol=4.0 * np.finfo(float).eps))
        step *= 2.0
    return alpha


def recover_alpha_short_time(
    series: ObservationSeries,
    a_x0: float,
    *,
    noise_floor: float | None = None,
    tolerance: float = 0.05,
) -> RecoveryReport:
    """Order from the short-time limit of ``t u_t / (u - a(x0))``."""
    t, h = series.t, series.h
    du = h - a_x0
    scale = max(float(np.max(np.abs(h))), abs(a_x0))
    if noise_floor is None:
        noise_floor = 1.0e-10 * scale
    usable = np.abs(du) > noise_floor
    if not np.any(usable) or scale == 0.0:
        raise DegenerateDataError("u(x0, t) - a(x0) is below the noise floor at every time")

    r = _log_derivative(t, h) / np.where(usable, du, 1.0)

    # the first usable index and its decade
    start = int(np.argmax(usable))
    decades = []
    t_lo = t[start]
    while True:
        window = usable & (t >= t_lo) & (t <= 10.0 * t_lo * (1.0 + 1.0e-12))
        if np.count_nonzero(window) < 4 or len(decades) == 2:
            break
        idx = np.flatnonzero(window)
        alpha, c, rms = _fit_power(t[idx], r[idx], 1.0, r[idx[0]])
        decades.append({"t_min": float(t[idx[0]]), "t_max": float(t[idx[-1]]),
                        "alpha": alpha, "c": c, "rms": rms})
        t_lo *= 10.0

    if not decades:
        raise DegenerateDataError("fewer than four usable samples in the smallest decade")

    alpha = decades[0]["alpha"]
    status = CONVERGED
    if len(decades) > 1 and abs(decades[1]["alpha"] - alpha) > tolerance:
        status = UNSTABLE

    return RecoveryReport(
        {"alpha": alpha},
        status,
        {
            "method": "short-time",
            "ratio_t": t[usable],
            "ratio": r[usable],
            "decades": decades,
            # conditioning: size of u - a(x0) where the extrapolation starts
            "conditioning": float(abs(du[start])),
        },
    )


def recover_alpha_long_time(
    series: ObservationSeries, *, decay: float = 0.1, window_decades: float = 1.0
) -> RecoveryReport:
    """Order from the long-time limit of ``-t u_t / u``."""
    t, h = series.t, series.h
    if np.all(h == 0.0):
        raise DegenerateDataError("series vanishes identically")
    T = series.horizon
    window = t >= T * 10.0 ** (-window_decades) * (1.0 - 1.0e-12)
    if np.count_nonzero(window) < 4:
        raise DegenerateDataError("fewer than four samples in the fit window")
    hw = h[window]
    nonzero = hw != 0.0
    if np.any(nonzero) and np.any(np.sign(hw[nonzero]) != np.sign(hw[nonzero][0])):
        raise SignChangeError("the series changes sign in the fit window")

    with np.errstate(divide="ignore", invalid="ignore"):
        r = -_log_derivative(t, h)[window] / hw
    tw = t[window]
    diagnostics: dict[str, Any] = {"method": "long-time", "ratio_t": tw, "ratio": r}

    if abs(h[-1]) >= decay * abs(h[0]):
        return RecoveryReport({"alpha": float("nan")}, INSUFFICIENT_HORIZON, diagnostics)
    if not np.all(nonzero) or np.any(r >= 1.0) or np.any(r <= 0.0):
        # exponential (or faster) decay: no algebraic plateau to extrapolate
        return RecoveryReport({"alpha": float("nan")}, UNSTABLE, diagnostics)

    alpha, c, rms = _fit_power(tw, r, -1.0, r[-1])
    diagnostics.update(c=c, rms=rms)
    status = CONVERGED if 0.0 < alpha < 1.0 and rms < 0.05 else UNSTABLE
    return RecoveryReport({"alpha": alpha}, status, diagnostics)


# }}}


# {{{ space-time orders


def _golden(f, lo: float, hi: float, width: float) -> tuple[float, list[tuple[float, float]]]:
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - g * (hi - lo), lo + g * (hi - lo)
    fc, fd = f(c), f(d)
    history = [(c, fc), (d, fd)]
    while hi - lo > width:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - g * (hi - lo)
            fc = f(c)
            history.append((c, fc))
        else:
            lo, c, fc = c, d, fd
            d = lo + g * (hi - lo)
            fd = f(d)
            history.append((d, fd))
    return 0.5 * (lo + hi), history


def recover_spacetime(
    series: ObservationSeries,
    eig: EigenSystem,
    a,
    *,
    width: float = 1.0e-4,
    gamma_bounds: tuple[float, float] = (1.0e-3, 2.0),
) -> RecoveryReport:
    """Two-stage recovery of ``(alpha, gamma)`` with known modal initial data ``a``."""
    if np.all(series.h == 0.0):
        raise DegenerateDataError("series vanishes identically")
    stage1 = recover_alpha_long_time(series)
    if not stage1.converged:
        return RecoveryReport(
            {"alpha": float("nan"), "gamma": float("nan")},
            stage1.status,
            {"method": "spacetime", "stage1": stage1.diagnostics},
        )
    alpha = stage1.estimates["alpha"]
    grid = TimeGrid(np.concatenate([[0.0], series.t]))
    norm_h = l2_norm(series.t, series.h)

    def misfit(gamma: float) -> float:
        u = solve_spacetime_modal(alpha, gamma, a, eig, grid, [series.x0]).values[0, 1:]
        return l2_norm(series.t, u - series.h) / norm_h

    gamma, history = _golden(misfit, gamma_bounds[0], gamma_bounds[1], width)
    gamma = min(gamma, 2.0 - 0.5 * width)
    values = np.array([v for _, v in history])
    status = CONVERGED
    if values.max() - values.min() < 1.0e-12:
        status = FLAT_OBJECTIVE

    return RecoveryReport(
        {"alpha": alpha, "gamma": gamma},
        status,
        {
            "method": "spacetime",
            "stage1": stage1.diagnostics,
            "golden": history,
            "misfit": misfit(gamma),
        },
    )


# }}}


# {{{ multi-term


def decreasing_orders(s: np.ndarray) -> np.ndarray:
    """Map unconstrained ``s`` to ``1 > alpha_1 > ... > alpha_l > 0``."""
    return np.cumprod(expit(np.asarray(s, dtype=np.float64)))


def decreasing_orders_inverse(alphas: Sequence[float]) -> np.ndarray:
    alphas = np.asarray(alphas, dtype=np.float64)
    ratios = alphas / np.concatenate([[1.0], alphas[:-1]])
    return logit(ratios)


@dataclass(frozen=True)
class MultitermOptions:
    starts: int = 8
    seed: int = 42
    epsilon: float = 0.0
    tolerance: float = 1.0e-2
    max_evals: int = 4000
    xatol: float = 1.0e-6
    fatol: float = 1.0e-14


class MultitermModel:
    """Forward map ``(alpha, p) -> u(x0, t_j)`` with cached per-order weights."""

    def __init__(self, series: ObservationSeries, eig: EigenSystem, a) -> None:
        self.series = series
        self.eig = eig
        self.a = np.asarray(a, dtype=np.float64)
        self.grid = TimeGrid(np.concatenate([[0.0], series.t]))

    def weights(self, alphas, p) -> L1Weights:
        total = None
        for alpha, pj in zip(alphas, p):
            w = caputo_l1_weights(float(alpha), self.grid).scaled(float(pj))
            total = w if total is None else total + w
        return total

    def __call__(self, alphas, p) -> np.ndarray:
        spectrum = OrderSpectrum(tuple(alphas), tuple(p))
        out = solve_multi_modal(
            spectrum, self.a, self.eig, self.grid, [self.series.x0],
            weights=self.weights(alphas, p),
        )
        return out.values[0, 1:]


def _unpack(theta: np.ndarray, ell: int) -> tuple[np.ndarray, np.ndarray]:
    return decreasing_orders(theta[:ell]), np.exp(theta[ell:])


def recover_multiterm(
    series: ObservationSeries,
    ell: int,
    eig: EigenSystem,
    a,
    opts: MultitermOptions | None = None,
) -> RecoveryReport:
    """Minimize the L2(0, T) misfit over ``(alpha, p)`` with multi-start Nelder-Mead."""
    opts = opts or MultitermOptions()
    if ell < 1:
        raise ValueError("term count must be >= 1")

    norm_h = l2_norm(series.t, series.h)
    model = MultitermModel(series, eig, a)

    def objective(theta: np.ndarray) -> float:
        if not np.all(np.isfinite(theta)) or np.any(np.abs(theta) > 30.0):
            return np.inf
        alphas, p = _unpack(theta, ell)
        if np.any(alphas <= 1.0e-6) or np.any(alphas >= 1.0 - 1.0e-9) or np.any(np.diff(alphas) >= 0):
            return np.inf
        u = model(alphas, p)
        value = l2_norm(series.t, u - series.h) ** 2
        if opts.epsilon > 0.0:
            value += opts.epsilon * (np.dot(alphas, alphas) + np.dot(p, p))
        return float(value)

    # quasi-random starts in (alpha, log p) space
    sampler = qmc.Sobol(d=2 * ell, scramble=True, seed=opts.seed)
    raw = sampler.random(opts.starts)
    starts = []
    for row in raw:
        alphas = np.sort(0.1 + 0.8 * row[:ell])[::-1]
        alphas = alphas - 1.0e-3 * np.arange(ell)  # keep them strictly ordered
        logp = -1.5 + 3.0 * row[ell:]
        starts.append(np.concatenate([decreasing_orders_inverse(alphas), logp]))

    def run(index: int) -> dict[str, Any]:
        res = minimize(
            objective,
            starts[index],
            method="Nelder-Mead",
            options={
                "xatol": opts.xatol,
                "fatol": opts.fatol,
                "maxfev": opts.max_evals,
                "adaptive": ell > 1,
            },
        )
        alphas, p = _unpack(res.x, ell)
        return {
            "start": index,
            "alphas": alphas.tolist(),
            "p": p.tolist(),
            "objective": float(res.fun),
            "misfit": math.sqrt(max(float(res.fun), 0.0)),
            "evals": int(res.nfev),
        }

    # starts are independent; results are reduced in start order either way
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(pool.map(run, range(len(starts))))
    else:
        candidates = [run(i) for i in range(len(starts))]

    best = min(candidates, key=lambda c: (c["objective"], c["start"]))
    estimates = {"alphas": tuple(best["alphas"]), "p": tuple(best["p"])}
    diagnostics = {"method": "multiterm", "ell": ell, "candidates": candidates,
                   "misfit": best["misfit"], "data_norm": norm_h}

    if norm_h == 0.0:
        status = NON_IDENTIFIABLE
    elif best["misfit"] > opts.tolerance * norm_h:
        status = STALLED
    else:
        status = CONVERGED
    return RecoveryReport(estimates, status, diagnostics)


# }}}


# {{{ stability experiments


def _series_for(params, a, eig: EigenSystem, grid: TimeGrid, x0: float) -> np.ndarray:
    alphas, p = params
    spectrum = OrderSpectrum(tuple(np.atleast_1d(alphas)), tuple(np.atleast_1d(p)))
    return solve_multi_modal(spectrum, a, eig, grid, [x0]).values[0, 1:]


def lipschitz_ratio(
    pairs, a, eig: EigenSystem, grid: TimeGrid, x0: float
) -> tuple[float, list[float]]:
    """Max over pairs of ``||u[alpha,p] - u[beta,q]|| / sum |alpha - beta| + |p - q|``."""
    ratios = []
    t = grid.t[1:]
    for first, second in pairs:
        da = np.abs(np.subtract(np.atleast_1d(first[0]), np.atleast_1d(second[0]))).sum()
        dp = np.abs(np.subtract(np.atleast_1d(first[1]), np.atleast_1d(second[1]))).sum()
        denom = da + dp
        if denom == 0.0:
            continue
        u1 = _series_for(first, a, eig, grid, x0)
        u2 = _series_for(second, a, eig, grid, x0)
        ratios.append(l2_norm(t, u1 - u2) / denom)
    return (max(ratios) if ratios else float("nan")), ratios


def distinguishability(params1, params2, a, eig: EigenSystem, grid: TimeGrid, x0: float) -> float:
    """Discrete L2 distance between the observed series of two parameter tuples."""
    u1 = _series_for(params1, a, eig, grid, x0)
    u2 = _series_for(params2, a, eig, grid, x0)
    return l2_norm(grid.t[1:], u1 - u2)


# }}}
