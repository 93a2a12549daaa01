"""Recovery of the distributed-order weight ``mu(alpha)`` from a single sensor,
plus the stability and distinguishability experiments for the weight map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize, minimize_scalar

from fracinv.forward import (
    BoundaryData,
    L1Weights,
    ObservationSeries,
    TimeGrid,
    WeightFunction,
    caputo_l1_weights,
    solve_distributed_modal,
    solve_multi_modal,
    distributed_spectrum,
)
from fracinv.order_recovery import CONVERGED, STALLED, l2_norm
from fracinv.spectral import EigenSystem

MAX_NODES = 16
ZERO_FLOOR = 1.0e-10
ALL_ZERO = "all-zero-estimate"


@dataclass
class WeightEstimate:
    weight: WeightFunction | None
    epsilon: float
    misfit: float
    objective: float
    status: str
    history: list[float] = field(default_factory=list)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        if self.weight is None:
            return np.zeros(0)
        return self.weight.values


@dataclass(frozen=True)
class WeightScenario:
    """Everything but the weight: initial data, sensor, grid and discretization."""

    eig: EigenSystem
    a: np.ndarray
    grid: TimeGrid
    x0: float
    quad_order: int = 16
    boundary: BoundaryData | None = None


def hat_mass_matrix(nodes: np.ndarray) -> np.ndarray:
    """Gram matrix of the piecewise-linear hat functions on ``nodes``."""
    h = np.diff(nodes)
    m = np.zeros((nodes.size, nodes.size))
    m[:-1, :-1] += np.diag(h / 3.0)
    m[1:, 1:] += np.diag(h / 3.0)
    m[:-1, 1:] += np.diag(h / 6.0)
    m[1:, :-1] += np.diag(h / 6.0)
    return m


class DistributedModel:
    """Forward map from node values of ``mu`` to ``u(x0, t_j)``.

    The per-order L1 weights at the Gauss-Legendre nodes are built once, so
    every evaluation only forms a linear combination and runs one L1 solve.
    """

    def __init__(self, scenario: WeightScenario, nodes: np.ndarray) -> None:
        self.scenario = scenario
        self.nodes = np.asarray(nodes, dtype=np.float64)
        xg, wg = leggauss(scenario.quad_order)
        self.alphas = 0.5 * (xg + 1.0)
        self.quad = 0.5 * wg
        # mu(alpha_k) = sum_m hat[k, m] v_m
        eye = np.eye(self.nodes.size)
        self.hat = np.stack([np.interp(self.alphas, self.nodes, e) for e in eye], axis=1)
        self._per_order = [caputo_l1_weights(float(a), scenario.grid) for a in self.alphas]

    def weights(self, values: np.ndarray) -> L1Weights | None:
        coeff = self.quad * (self.hat @ values)
        total = None
        for ck, wk in zip(coeff, self._per_order):
            if ck <= 0.0:
                continue
            w = wk.scaled(float(ck))
            total = w if total is None else total + w
        return total

    def __call__(self, values: np.ndarray) -> np.ndarray | None:
        weights = self.weights(values)
        if weights is None:
            return None
        s = self.scenario
        spectrum = distributed_spectrum(WeightFunction(self.nodes, values), s.quad_order)
        out = solve_multi_modal(
            spectrum, s.a, s.eig, s.grid, [s.x0], boundary=s.boundary, weights=weights
        )
        return out.values[0, 1:]


def recover_weight(
    series: ObservationSeries,
    M: int,
    epsilon: float,
    eig: EigenSystem,
    a,
    *,
    quad_order: int = 16,
    boundary: BoundaryData | None = None,
    max_evals: int = 6000,
    restarts: int = 3,
    tolerance: float = 1.0e-2,
) -> WeightEstimate:
    """Nonnegative piecewise-linear ``mu`` on ``M`` uniform nodes minimizing
    ``||u[mu](x0) - h||^2 + epsilon ||mu||^2_{L2(0,1)}``.

    Node values are optimized in log-space (projected Nelder-Mead); values below
    :data:`ZERO_FLOOR` are clamped to zero. The search starts from the best
    constant weight.
    """
    if not 2 <= M <= MAX_NODES:
        raise ValueError(f"node count must lie in [2, {MAX_NODES}], got {M}")
    if epsilon < 0.0:
        raise ValueError("regularization must be nonnegative")

    norm_h = l2_norm(series.t, series.h)
    if norm_h == 0.0:
        return WeightEstimate(None, epsilon, 0.0, 0.0, ALL_ZERO)

    nodes = np.linspace(0.0, 1.0, M)
    grid = TimeGrid(np.concatenate([[0.0], series.t]))
    scenario = WeightScenario(eig, np.asarray(a, dtype=np.float64), grid, series.x0,
                              quad_order, boundary)
    model = DistributedModel(scenario, nodes)
    mass = hat_mass_matrix(nodes)
    history: list[float] = []

    def project(theta: np.ndarray) -> np.ndarray:
        v = np.exp(np.clip(theta, -745.0, 50.0))
        return np.where(v < ZERO_FLOOR, 0.0, v)

    def functional(v: np.ndarray) -> tuple[float, float]:
        u = model(v)
        if u is None:
            return math.inf, math.inf
        misfit = l2_norm(series.t, u - series.h)
        return misfit, misfit**2 + epsilon * float(v @ mass @ v)

    def objective(theta: np.ndarray) -> float:
        value = functional(project(theta))[1]
        history.append(value)
        return value

    # best constant weight as the starting point
    res0 = minimize_scalar(
        lambda s: functional(np.full(M, math.exp(s)))[1],
        bounds=(-8.0, 8.0),
        method="bounded",
        options={"xatol": 1.0e-6},
    )
    theta = np.full(M, res0.x)
    evals = 0
    best = math.inf
    for _ in range(restarts + 1):
        res = minimize(
            objective,
            theta,
            method="Nelder-Mead",
            options={"maxfev": max_evals, "xatol": 1.0e-6, "fatol": 1.0e-18, "adaptive": True},
        )
        evals += int(res.nfev)
        if res.fun >= best * (1.0 - 1.0e-6):
            break
        best = float(res.fun)
        # restart with a fresh simplex; clamped nodes get a chance to regrow
        v = project(res.x)
        theta = np.log(np.maximum(v, 1.0e-3 * max(v.max(), ZERO_FLOOR)))

    values = project(res.x)
    misfit, value = functional(values)
    if not np.any(values > 0.0):
        return WeightEstimate(None, epsilon, misfit, value, ALL_ZERO, history)

    status = CONVERGED if misfit <= tolerance * norm_h else STALLED
    return WeightEstimate(
        WeightFunction(nodes, values),
        epsilon,
        misfit,
        value,
        status,
        history,
        {"evals": evals, "start": float(math.exp(res0.x)), "data_norm": norm_h},
    )


# {{{ experiments


def _observe(mu: WeightFunction, scenario: WeightScenario) -> np.ndarray:
    s = scenario
    out = solve_distributed_modal(mu, s.quad_order, s.a, s.eig, s.grid, [s.x0], s.boundary)
    return out.values[0, 1:]


def weight_sup_distance(mu: WeightFunction, omega: WeightFunction) -> float:
    """``||mu - omega||_{L^inf(0,1)}``, exact for piecewise-linear weights."""
    x = np.union1d(mu.nodes, omega.nodes)
    return float(np.max(np.abs(mu(x) - omega(x))))


def weight_distance(
    mu: WeightFunction, omega: WeightFunction, scenario: WeightScenario
) -> tuple[float, float]:
    """``(||u[mu] - u[omega]||_{L2(0,T)} at x0, ||mu - omega||_{L^inf})``."""
    dw = weight_sup_distance(mu, omega)
    if dw == 0.0:
        return 0.0, 0.0
    du = _observe(mu, scenario) - _observe(omega, scenario)
    return l2_norm(scenario.grid.t[1:], du), dw


def check_boundary_bump(g: BoundaryData, horizon: float, samples: int = 2001) -> None:
    """Reject boundary data that is negative or not compactly supported in (0, T)."""
    t = np.linspace(0.0, horizon, samples)
    gl, gr = g.evaluate(t)
    if np.any(gl < 0.0) or np.any(gr < 0.0):
        raise ValueError("boundary data must be nonnegative")
    if not g.compact_support:
        raise ValueError("boundary data must be flagged as compactly supported in (0, T)")
    for values in (gl, gr):
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ValueError("boundary data must vanish at t = 0 and t = T")


def nonhomogeneous_distinguishability(
    mu: WeightFunction,
    omega: WeightFunction,
    g: BoundaryData,
    eig: EigenSystem,
    grid: TimeGrid,
    x0: float,
    quad_order: int = 16,
) -> float:
    """L2(0, T) distance at ``x0`` for zero initial data driven by boundary data ``g``."""
    check_boundary_bump(g, grid.horizon)
    scenario = WeightScenario(eig, np.zeros(eig.count), grid, x0, quad_order, g)
    if weight_sup_distance(mu, omega) == 0.0:
        return 0.0
    return l2_norm(grid.t[1:], _observe(mu, scenario) - _observe(omega, scenario))


# }}}
