r"""Mittag-Leffler function on the negative real axis.

.. math::

    E_{\alpha,\beta}(z) = \sum_{k=0}^\infty \frac{z^k}{\Gamma(\alpha k + \beta)},
    \qquad z \le 0.

Three evaluation branches, each with its own accuracy certificate:

* Taylor series for small :math:`|z|`, accepted when the sum of absolute
  terms (which bounds the cancellation) stays below :data:`TAYLOR_ABS_SUM_MAX`;
* the algebraic asymptotic expansion (plus the exact pole residues for
  :math:`\alpha > 1`), accepted when the envelope of the first neglected term
  is below :data:`ASYMPTOTIC_TOL`;
* the Hankel contour collapsed onto the branch cut, evaluated with
  Gauss-Legendre panels (:mod:`fracinv.kernels`) in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, rgamma

from fracinv import kernels
from fracinv._kernels_py import sinpi

#: upper cap on |z| for the Taylor branch
Z_LO = 5.0
#: Taylor is accepted while sum_k |z|^k / Gamma(alpha k + beta) stays below this
TAYLOR_ABS_SUM_MAX = 100.0
#: first-neglected-term envelope accepted by the asymptotic branch
ASYMPTOTIC_TOL = 1.0e-15
#: maximum number of asymptotic terms
ASYMPTOTIC_MAX_TERMS = 400
#: the branch-cut quadrature loses about log10(1/|sin(pi alpha)|) digits
CUT_MIN_SIN = 3.0e-5


class MLDomainError(ValueError):
    """Argument or parameters outside the supported domain."""


class MLAccuracyError(ArithmeticError):
    """No evaluation branch could certify the requested accuracy."""


@dataclass(frozen=True)
class MLParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0) or not math.isfinite(self.alpha):
            raise MLDomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not (self.beta > 0.0) or not math.isfinite(self.beta):
            raise MLDomainError(f"beta must be positive, got {self.beta}")


# {{{ branches


def _taylor(alpha: float, beta: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Series at ``-x``; returns the value and the certificate mask."""
    value = np.zeros_like(x)
    abs_sum = np.zeros_like(x)
    block = 64
    k0 = 0
    # log-magnitude of the largest term decides when to stop
    while True:
        k = np.arange(k0, k0 + block)
        rg = rgamma(alpha * k + beta)
        with np.errstate(over="ignore", invalid="ignore"):
            terms = np.power(-x[:, None], k[None, :]) * rg[None, :]
        terms = np.where(np.isfinite(terms), terms, np.inf)
        value += terms.sum(axis=1)
        abs_sum += np.abs(terms).sum(axis=1)
        k0 += block

        if alpha * k0 + beta > 171.0:
            break
        tail = np.abs(terms[:, -1])
        peak_passed = np.all(x <= (alpha * k0) ** alpha + 1.0e-300)
        if peak_passed and np.all(tail <= 1.0e-18 * np.maximum(abs_sum, 1.0)):
            break

    ok = np.isfinite(abs_sum) & (abs_sum <= TAYLOR_ABS_SUM_MAX)
    return value, ok


def _residues(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    # poles of the Laplace-domain integrand on the principal sheet (alpha > 1)
    s = np.power(x, 1.0 / alpha) * np.exp(1j * math.pi / alpha)
    with np.errstate(under="ignore"):
        return (2.0 / alpha) * np.real(np.exp(s) * np.power(s, 1.0 - beta))


def _asymptotic(
    alpha: float, beta: float, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Algebraic expansion ``-sum_k (-x)^{-k} / Gamma(beta - alpha k)``."""
    value = np.zeros_like(x)
    ok = np.zeros(x.shape, dtype=bool)
    active = np.ones(x.shape, dtype=bool)
    best = np.full(x.shape, np.inf)
    logx = np.log(x)

    for k in range(1, ASYMPTOTIC_MAX_TERMS + 1):
        # |1/Gamma(beta - alpha k)| <= Gamma(1 - beta + alpha k) / pi
        arg = 1.0 - beta + alpha * k
        if arg > 0:
            env = np.exp(gammaln(arg) - k * logx) / math.pi
        else:
            env = np.exp(-k * logx) / abs(math.gamma(beta - alpha * k) or np.inf)

        stop = active & (env > best)
        active &= ~stop
        if not np.any(active):
            break

        best = np.where(active, np.minimum(best, env), best)
        converged = active & (env <= ASYMPTOTIC_TOL)
        ok |= converged
        term = -rgamma(beta - alpha * k) * np.power(-1.0 / x, k)
        value = np.where(active, value + term, value)
        active &= ~converged

    if alpha > 1.0:
        value = value + _residues(alpha, beta, x)
    if alpha == 1.0:
        # exponentially small term hidden behind the cut
        ok &= np.exp(-x) * np.power(x, abs(1.0 - beta) + 1.0) <= ASYMPTOTIC_TOL
    return value, ok


def _cut(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Branch-cut representation, with the recurrence shifting beta into (1-alpha, 1]."""
    if alpha == 1.0:
        return _cut_alpha_one(beta, x)

    # the near-pole at r^alpha = -x cos(pi alpha) sharpens as alpha -> 1; at
    # alpha = 2 the integrand is smooth and the residues carry the oscillation
    if abs(alpha - 1.0) < 0.5 and abs(sinpi(alpha)) < CUT_MIN_SIN:
        raise MLAccuracyError(
            f"alpha={alpha} is too close to 1 for the branch-cut quadrature"
        )

    shifts = 0
    b = beta
    while b > 1.0:
        b -= alpha
        shifts += 1

    value = kernels.ml_cut_integral(alpha, b, x)
    if alpha > 1.0:
        value = value + _residues(alpha, b, x)

    # E_{a,b+a}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z
    z = -x
    for _ in range(shifts):
        value = (value - rgamma(b)) / z
        b += alpha
    return value


def _cut_alpha_one(beta: float, x: np.ndarray) -> np.ndarray:
    from numpy.polynomial.legendre import leggauss

    if beta == 1.0:
        return np.exp(-x)
    if beta < 1.0:
        # E_{1,b}(z) = 1/Gamma(b) + z E_{1,b+1}(z)
        return rgamma(beta) - x * _cut_alpha_one(beta + 1.0, x)

    # E_{1,b}(-x) = 1/Gamma(b) int_0^1 exp(-x (1 - v^q)) dv, q = 1/(b - 1)
    q = 1.0 / (beta - 1.0)
    grading = 3.0 ** -np.arange(20, 0, -1, dtype=np.float64)
    edges = np.concatenate([[0.0], 0.5 * grading, [0.5], 1.0 - 0.5 * grading[::-1], [1.0]])
    xg, wg = leggauss(16)
    a, b = edges[:-1, None], edges[1:, None]
    v = 0.5 * (b - a) * xg + 0.5 * (a + b)
    half = 0.5 * (b - a)

    out = np.empty_like(x)
    for i, xi in enumerate(x.flat):
        f = np.exp(-xi * (1.0 - np.power(v, q)))
        out.flat[i] = np.sum(half * (f @ wg)[:, None])
    return out * rgamma(beta)


# }}}


def mittag_leffler(alpha: float, beta: float, z) -> np.ndarray | float:
    """Evaluate :math:`E_{\\alpha,\\beta}(z)` for real ``z <= 0`` (scalar or array)."""
    MLParams(alpha, beta)
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=np.float64)
    if np.any(np.isnan(z)):
        raise MLDomainError("z contains NaN")
    if np.any(z > 0.0):
        raise MLDomainError("only the negative real axis (z <= 0) is supported")

    x = -z.ravel()
    out = np.empty_like(x)

    if alpha == 1.0 and beta == 1.0:
        out = np.exp(-x)
    else:
        todo = np.ones(x.shape, dtype=bool)

        zero = x == 0.0
        out[zero] = rgamma(beta)
        todo &= ~zero

        small = todo & (x <= Z_LO) & (np.power(x, 1.0 / alpha) <= 8.0)
        if np.any(small):
            val, ok = _taylor(alpha, beta, x[small])
            idx = np.flatnonzero(small)[ok]
            out[idx] = val[ok]
            todo[idx] = False

        if np.any(todo):
            idx = np.flatnonzero(todo)
            val, ok = _asymptotic(alpha, beta, x[idx])
            out[idx[ok]] = val[ok]
            todo[idx[ok]] = False

        if np.any(todo):
            idx = np.flatnonzero(todo)
            out[idx] = _cut(alpha, beta, x[idx])

    out = out.reshape(z.shape)
    return float(out) if scalar else out


def ml_eval(params: MLParams, z) -> np.ndarray | float:
    return mittag_leffler(params.alpha, params.beta, z)


def ml_relax(alpha: float, lam, t) -> np.ndarray | float:
    """Per-mode relaxation factor :math:`E_{\\alpha,1}(-\\lambda t^\\alpha)`.

    ``lam`` and ``t`` broadcast against each other.
    """
    lam = np.asarray(lam, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(lam < 0.0):
        raise MLDomainError("decay rate must be nonnegative")
    if np.any(t < 0.0):
        raise MLDomainError("time must be nonnegative")
    if not 0.0 < alpha <= 1.0:
        raise MLDomainError(f"relaxation order must lie in (0, 1], got {alpha}")
    return mittag_leffler(alpha, 1.0, -lam * np.power(t, alpha))


def ml_relax_deriv(alpha: float, lam, t) -> np.ndarray | float:
    """Time derivative :math:`-\\lambda t^{\\alpha-1} E_{\\alpha,\\alpha}(-\\lambda t^\\alpha)`."""
    lam = np.asarray(lam, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t <= 0.0):
        raise MLDomainError("the derivative is singular at t = 0")
    if np.any(lam < 0.0):
        raise MLDomainError("decay rate must be nonnegative")
    if not 0.0 < alpha <= 1.0:
        raise MLDomainError(f"relaxation order must lie in (0, 1], got {alpha}")
    ta = np.power(t, alpha)
    return -lam * ta / t * mittag_leffler(alpha, alpha, -lam * ta)
