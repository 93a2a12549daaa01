"""Dirichlet eigensystem of -d^2/dx^2 on (0, L), projection and synthesis."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

QUAD_PANELS = 8


class AliasingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DomainSpec:
    length: float = 1.0
    dim: int = 1

    def __post_init__(self) -> None:
        if not (self.length > 0.0) or not math.isfinite(self.length):
            raise ValueError(f"domain length must be positive, got {self.length}")
        if self.dim != 1:
            raise ValueError("only one-dimensional intervals are supported")


@dataclass(frozen=True)
class EigenSystem:
    domain: DomainSpec
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"mode count must be >= 1, got {self.count}")

    @property
    def length(self) -> float:
        return self.domain.length

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.count + 1)

    @property
    def eigenvalues(self) -> np.ndarray:
        return (self.modes * math.pi / self.length) ** 2

    def eigenfunctions(self, x) -> np.ndarray:
        """Matrix ``phi[n, i] = phi_{n+1}(x_i)``."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        L = self.length
        return math.sqrt(2.0 / L) * np.sin(np.outer(self.modes, x) * (math.pi / L))


def build_interval_eigensystem(length: float, count: int) -> EigenSystem:
    return EigenSystem(DomainSpec(length), count)


def fractional_eigenvalues(eig: EigenSystem, gamma: float) -> np.ndarray:
    """Spectral symbol of (-Laplacian)^{gamma/2}, i.e. ``lambda_n ** (gamma / 2)``."""
    if not 0.0 < gamma <= 2.0:
        raise ValueError(f"space order must lie in (0, 2], got {gamma}")
    if gamma == 2.0:
        return eig.eigenvalues
    return eig.eigenvalues ** (0.5 * gamma)


def quadrature_rule(length: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on (0, L): 8 panels of degree max(16, points/8)."""
    degree = max(16, -(-points // QUAD_PANELS))
    xg, wg = leggauss(degree)
    edges = np.linspace(0.0, length, QUAD_PANELS + 1)
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (b - a) * xg + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg
    return x.ravel(), np.broadcast_to(w, x.shape).ravel()


def project(
    f: Callable[[np.ndarray], np.ndarray], eig: EigenSystem, quad_points: int | None = None
) -> np.ndarray:
    """Modal coefficients ``(f, phi_n)`` by composite Gauss-Legendre quadrature."""
    if quad_points is None:
        quad_points = max(4 * eig.count, 128)
    if quad_points < 4 * eig.count:
        warnings.warn(
            f"{quad_points} quadrature points for {eig.count} modes may alias "
            f"(need >= {4 * eig.count})",
            AliasingWarning,
            stacklevel=2,
        )
    x, w = quadrature_rule(eig.length, quad_points)
    fx = np.broadcast_to(np.asarray(f(x), dtype=np.float64), x.shape)
    if not np.all(np.isfinite(fx)):
        raise ValueError("function values must be finite")
    return eig.eigenfunctions(x) @ (w * fx)


def synthesize(coeffs, eig: EigenSystem, x) -> np.ndarray:
    """Evaluate ``sum_n a_n phi_n(x)``; ``coeffs`` may carry trailing axes (e.g. time)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape[0] != eig.count:
        raise ValueError(
            f"expected {eig.count} coefficients, got {coeffs.shape[0]}"
        )
    phi = eig.eigenfunctions(x)
    return np.tensordot(phi, coeffs, axes=(0, 0))
