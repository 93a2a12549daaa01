"""Forward solvers for single-term, space-time, multi-term and distributed-order
time-fractional diffusion on an interval.

Every solver works per Dirichlet mode: the single-term and space-time problems
are solved exactly with Mittag-Leffler relaxation factors, the multi-term and
distributed-order problems by implicit L1 time stepping of the modal fractional
ODEs. Nonhomogeneous boundary values are removed by a linear lift.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from fracinv import kernels
from fracinv.mittag_leffler import ml_relax
from fracinv.spectral import EigenSystem, fractional_eigenvalues, synthesize


class CompatibilityWarning(UserWarning):
    """Boundary data and initial data disagree at t = 0."""


class SolverError(RuntimeError):
    pass


# {{{ data types


@dataclass(frozen=True)
class OrderSpectrum:
    """Orders ``1 > alphas[0] > ... > alphas[-1] > 0`` with positive weights."""

    alphas: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in self.alphas)
        weights = tuple(float(p) for p in self.weights)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "weights", weights)

        if len(alphas) < 1:
            raise ValueError("at least one order is required")
        if len(alphas) != len(weights):
            raise ValueError("orders and weights must have the same length")
        if not all(0.0 < a < 1.0 for a in alphas):
            raise ValueError(f"orders must lie in (0, 1), got {alphas}")
        if any(a <= b for a, b in zip(alphas, alphas[1:])):
            raise ValueError(f"orders must be strictly decreasing, got {alphas}")
        if not all(p > 0.0 and math.isfinite(p) for p in weights):
            raise ValueError(f"weights must be positive, got {weights}")

    @property
    def ell(self) -> int:
        return len(self.alphas)

    @classmethod
    def single(cls, alpha: float, weight: float = 1.0) -> OrderSpectrum:
        return cls((alpha,), (weight,))


@dataclass(frozen=True)
class WeightFunction:
    """Continuous piecewise-linear nonnegative weight on [0, 1]."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("nodes and values must be 1d arrays of equal length >= 2")
        if nodes[0] != 0.0 or nodes[-1] != 1.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must increase strictly from 0 to 1")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ValueError("weight values must be finite and nonnegative")
        if not np.any(values > 0.0):
            raise ValueError("weight function must not vanish identically")

    @classmethod
    def uniform(cls, values: Sequence[float]) -> WeightFunction:
        values = np.asarray(values, dtype=np.float64)
        return cls(np.linspace(0.0, 1.0, values.size), values)

    @classmethod
    def from_callable(cls, mu: Callable[[np.ndarray], np.ndarray], count: int) -> WeightFunction:
        nodes = np.linspace(0.0, 1.0, count)
        return cls(nodes, np.asarray(mu(nodes), dtype=np.float64))

    def __call__(self, alpha) -> np.ndarray:
        return np.interp(alpha, self.nodes, self.values)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, self.nodes))


@dataclass(frozen=True)
class TimeGrid:
    t: np.ndarray
    grading: str = "custom"

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.float64)
        object.__setattr__(self, "t", t)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least two points")
        if t[0] != 0.0:
            raise ValueError("time grid must start at t = 0")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("time grid must be strictly increasing")

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> TimeGrid:
        return cls(np.linspace(0.0, horizon, steps + 1), "uniform")

    @classmethod
    def graded(cls, horizon: float, steps: int, exponent: float) -> TimeGrid:
        """``t_j = T (j / K) ** r``, clustered near t = 0 for ``r > 1``."""
        if exponent < 1.0:
            raise ValueError("grading exponent must be >= 1")
        j = np.arange(steps + 1) / steps
        return cls(horizon * j**exponent, "graded")

    @classmethod
    def logarithmic(cls, horizon: float, steps: int, first: float) -> TimeGrid:
        """``0`` followed by ``steps`` log-spaced points from ``first`` to ``horizon``."""
        if not 0.0 < first < horizon:
            raise ValueError("need 0 < first < horizon")
        return cls(np.concatenate([[0.0], np.geomspace(first, horizon, steps)]), "log")

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    @property
    def steps(self) -> int:
        return self.t.size - 1

    def is_uniform(self) -> bool:
        dt = np.diff(self.t)
        return bool(np.allclose(dt, dt[0], rtol=1.0e-12, atol=0.0))

    def refine(self, factor: int) -> TimeGrid:
        """Insert ``factor - 1`` equispaced points in every step (keeps the old nodes)."""
        s = np.linspace(0.0, 1.0, factor + 1)[:-1]
        t0, dt = self.t[:-1, None], np.diff(self.t)[:, None]
        t = np.concatenate([(t0 + s * dt).ravel(), self.t[-1:]])
        return TimeGrid(t, self.grading)


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet values ``g(0, t)`` and ``g(L, t)``; ``None`` means zero."""

    left: Callable[[np.ndarray], np.ndarray] | None = None
    right: Callable[[np.ndarray], np.ndarray] | None = None
    compact_support: bool = False

    def evaluate(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=np.float64)
        gl = np.zeros_like(t) if self.left is None else np.broadcast_to(self.left(t), t.shape)
        gr = np.zeros_like(t) if self.right is None else np.broadcast_to(self.right(t), t.shape)
        gl, gr = np.asarray(gl, dtype=np.float64), np.asarray(gr, dtype=np.float64)
        if not (np.all(np.isfinite(gl)) and np.all(np.isfinite(gr))):
            raise ValueError("boundary data must be finite")
        return gl, gr

    def is_zero(self) -> bool:
        return self.left is None and self.right is None


@dataclass
class Lift:
    """Harmonic lift ``w(x,t) = g_l(t) (1 - x/L) + g_r(t) x/L`` and its modal data."""

    length: float
    left: np.ndarray
    right: np.ndarray
    modal: np.ndarray
    source: np.ndarray

    def evaluate(self, x) -> np.ndarray:
        """Lift values with shape ``(len(x), K + 1)``."""
        s = np.atleast_1d(np.asarray(x, dtype=np.float64))[:, None] / self.length
        return self.left[None, :] * (1.0 - s) + self.right[None, :] * s


@dataclass
class SolutionField:
    x: np.ndarray
    grid: TimeGrid
    values: np.ndarray
    modal: np.ndarray
    eig: EigenSystem
    lift: Lift | None = None
    provenance: dict = field(default_factory=dict)

    def at(self, x0: float) -> np.ndarray:
        """Solution at one point via modal synthesis (not grid interpolation)."""
        h = synthesize(self.modal, self.eig, [x0])[0]
        if self.lift is not None:
            h = h + self.lift.evaluate([x0])[0]
        return h


@dataclass(frozen=True)
class ObservationSeries:
    x0: float
    t: np.ndarray
    h: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "h", h)
        if t.ndim != 1 or t.shape != h.shape or t.size < 2:
            raise ValueError("times and values must be 1d arrays of equal length")
        if np.any(t <= 0.0) or np.any(np.diff(t) <= 0.0):
            raise ValueError("observation times must be positive and increasing")

    @property
    def horizon(self) -> float:
        return float(self.t[-1])


# }}}


# {{{ ML-exact solvers


def _field(modal, eig, grid, x_points, lift=None, **provenance) -> SolutionField:
    x = np.atleast_1d(np.asarray(x_points, dtype=np.float64))
    values = synthesize(modal, eig, x)
    if lift is not None:
        values = values + lift.evaluate(x)
    return SolutionField(x, grid, values, modal, eig, lift, provenance)


def _relaxation(alpha: float, lam: np.ndarray, a: np.ndarray, t: np.ndarray) -> np.ndarray:
    modal = np.zeros((lam.size, t.size))
    active = a != 0.0
    if np.any(active):
        modal[active] = a[active, None] * ml_relax(alpha, lam[active, None], t[None, :])
    return modal


def _check_coefficients(a, eig: EigenSystem) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (eig.count,):
        raise ValueError(f"expected {eig.count} modal coefficients, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("modal coefficients must be finite")
    return a


def solve_single_modal(alpha, a, eig, grid: TimeGrid, x_points) -> SolutionField:
    """``u = sum_n a_n E_{alpha,1}(-lambda_n t^alpha) phi_n``; ``alpha = 1`` gives the heat equation."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {alpha}")
    a = _check_coefficients(a, eig)
    modal = _relaxation(alpha, eig.eigenvalues, a, grid.t)
    return _field(modal, eig, grid, x_points, model="single", alpha=alpha, path="ml-exact")


def solve_spacetime_modal(alpha, gamma, a, eig, grid: TimeGrid, x_points) -> SolutionField:
    """Same as :func:`solve_single_modal` with decay rates ``lambda_n ** (gamma / 2)``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"order must lie in (0, 1], got {alpha}")
    a = _check_coefficients(a, eig)
    lam = fractional_eigenvalues(eig, gamma)
    modal = _relaxation(alpha, lam, a, grid.t)
    return _field(
        modal, eig, grid, x_points, model="spacetime", alpha=alpha, gamma=gamma, path="ml-exact"
    )


# }}}


# {{{ L1 stepping


@dataclass(frozen=True)
class L1Weights:
    """Caputo L1 weights: ``d^alpha v(t_j) ~ sum_{k<j} B[j,k] (v_{k+1} - v_k)``.

    On uniform grids only the Toeplitz generator ``c`` is stored
    (``B[j,k] = c[j-1-k]``); otherwise ``dense`` holds the ``(K+1, K)`` table.
    """

    grid: TimeGrid
    c: np.ndarray | None = None
    dense: np.ndarray | None = None

    def matrix(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        K = self.grid.steps
        j = np.arange(K + 1)[:, None]
        k = np.arange(K)[None, :]
        m = j - 1 - k
        return np.where(m >= 0, self.c[np.clip(m, 0, K - 1)], 0.0)

    def apply(self, v) -> np.ndarray:
        """Discrete Caputo derivative of samples ``v`` at every ``t_j`` (zero at ``t_0``)."""
        dv = np.diff(np.asarray(v, dtype=np.float64), axis=-1)
        return dv @ self.matrix().T

    def scaled(self, p: float) -> L1Weights:
        if self.c is not None:
            return L1Weights(self.grid, c=p * self.c)
        return L1Weights(self.grid, dense=p * self.dense)

    def __add__(self, other: L1Weights) -> L1Weights:
        if self.c is not None and other.c is not None:
            return L1Weights(self.grid, c=self.c + other.c)
        return L1Weights(self.grid, dense=self.matrix() + other.matrix())


def caputo_l1_weights(alpha: float, grid: TimeGrid) -> L1Weights:
    """L1 weights with the kernel ``(t - s)^{-alpha} / Gamma(1 - alpha)`` integrated exactly."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"order must lie in (0, 1), got {alpha}")
    scale = 1.0 / math.gamma(2.0 - alpha)
    if grid.is_uniform():
        tau = grid.t[1] - grid.t[0]
        m = np.arange(grid.steps + 1, dtype=np.float64) ** (1.0 - alpha)
        return L1Weights(grid, c=scale * tau ** (-alpha) * np.diff(m))

    t = grid.t
    d = np.clip(t[:, None] - t[None, :], 0.0, None) ** (1.0 - alpha)
    tau = np.diff(t)
    return L1Weights(grid, dense=scale * (d[:, :-1] - d[:, 1:]) / tau[None, :])


def combined_weights(spectrum: OrderSpectrum, grid: TimeGrid) -> L1Weights:
    total = None
    for alpha, p in zip(spectrum.alphas, spectrum.weights):
        w = caputo_l1_weights(alpha, grid).scaled(p)
        total = w if total is None else total + w
    return total


def step_modal_multiterm(
    spectrum: OrderSpectrum | L1Weights,
    lam,
    a_n,
    grid: TimeGrid,
    source=None,
) -> np.ndarray:
    """Implicit L1 stepping of ``sum_j p_j d^{alpha_j} u_n = -lambda_n u_n + f_n``.

    ``lam`` and ``a_n`` are per-mode arrays (or scalars); ``source`` has shape
    ``(modes, K + 1)``. Returns the ``(modes, K + 1)`` trajectories.
    """
    weights = spectrum if isinstance(spectrum, L1Weights) else combined_weights(spectrum, grid)
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    a_n = np.broadcast_to(np.asarray(a_n, dtype=np.float64), lam.shape)
    if np.any(lam < 0.0):
        raise ValueError("decay rates must be nonnegative")
    if source is not None:
        source = np.ascontiguousarray(np.broadcast_to(source, (lam.size, grid.steps + 1)))

    if weights.c is not None:
        diag = weights.c[0]
        if not diag > 0.0:
            raise SolverError("singular implicit step")
        return kernels.l1_solve_uniform(weights.c, lam, a_n, source)

    if not np.all(np.diagonal(weights.dense, offset=-1) > 0.0):
        raise SolverError("singular implicit step")
    return kernels.l1_solve_dense(weights.dense, lam, a_n, source)


def lift_boundary(
    g: BoundaryData, eig: EigenSystem, grid: TimeGrid, operator: OrderSpectrum | L1Weights
) -> Lift:
    """Linear lift of the boundary data and the modal source ``-D w_n`` it induces."""
    weights = operator if isinstance(operator, L1Weights) else combined_weights(operator, grid)
    gl, gr = g.evaluate(grid.t)
    if gl[0] != 0.0 or gr[0] != 0.0:
        warnings.warn(
            "boundary values at t = 0 are incompatible with the (vanishing) trace of "
            "the modal initial data; the solution is understood in the weak sense",
            CompatibilityWarning,
            stacklevel=2,
        )
    n = eig.modes
    L = eig.length
    # (1 - x/L, phi_n) and (x/L, phi_n) in closed form
    c_left = math.sqrt(2.0 * L) / (n * math.pi)
    c_right = -c_left * (-1.0) ** n
    modal = c_left[:, None] * gl[None, :] + c_right[:, None] * gr[None, :]
    source = -weights.apply(modal)
    return Lift(L, gl, gr, modal, source)


def solve_multi_modal(
    spectrum: OrderSpectrum,
    a,
    eig: EigenSystem,
    grid: TimeGrid,
    x_points,
    boundary: BoundaryData | None = None,
    weights: L1Weights | None = None,
) -> SolutionField:
    a = _check_coefficients(a, eig)
    if weights is None:
        weights = combined_weights(spectrum, grid)

    lift = None
    source = None
    u0 = a
    if boundary is not None and not boundary.is_zero():
        lift = lift_boundary(boundary, eig, grid, weights)
        source = lift.source
        u0 = a - lift.modal[:, 0]

    # homogeneous part only; the lift is added at synthesis
    modal = step_modal_multiterm(weights, eig.eigenvalues, u0, grid, source)
    return _field(
        modal, eig, grid, x_points, lift,
        model="multiterm",
        alphas=spectrum.alphas,
        weights=spectrum.weights,
        path="l1",
    )


def distributed_spectrum(mu: WeightFunction, quad_order: int) -> OrderSpectrum:
    """Gauss-Legendre discretization of ``int_0^1 mu(alpha) d^alpha d alpha``."""
    if quad_order < 4:
        raise ValueError("quadrature order must be >= 4")
    xg, wg = leggauss(quad_order)
    nodes = 0.5 * (xg + 1.0)
    w = 0.5 * wg * mu(nodes)
    order = np.argsort(nodes)[::-1]
    nodes, w = nodes[order], w[order]
    keep = w > 0.0
    if not np.any(keep):
        raise SolverError("weight function vanishes at every quadrature node")
    return OrderSpectrum(tuple(nodes[keep]), tuple(w[keep]))


def solve_distributed_modal(
    mu: WeightFunction,
    quad_order: int,
    a,
    eig: EigenSystem,
    grid: TimeGrid,
    x_points,
    boundary: BoundaryData | None = None,
) -> SolutionField:
    spectrum = distributed_spectrum(mu, quad_order)
    out = solve_multi_modal(spectrum, a, eig, grid, x_points, boundary)
    out.provenance.update(model="distributed", quad_order=quad_order)
    return out


# }}}


def observe(field: SolutionField, x0: float) -> ObservationSeries:
    """Time series at an interior sensor; the ``t = 0`` sample is dropped."""
    L = field.eig.length
    if not 0.0 < x0 < L:
        raise ValueError(f"sensor must be interior to (0, {L}), got {x0}")
    h = field.at(x0)
    return ObservationSeries(x0, field.grid.t[1:], h[1:])


def initial_value(a, eig: EigenSystem, x0: float) -> float:
    return float(synthesize(a, eig, [x0])[0])
