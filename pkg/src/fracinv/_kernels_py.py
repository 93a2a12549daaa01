"""Pure-Python (numpy) implementations of the hot kernels.

These are the reference versions; ``_kernels.pyx`` mirrors them loop for loop.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

GL_NODES, GL_WEIGHTS = leggauss(16)

# ratio-3 geometric grading in u = r**(nu + 1) towards the origin
ORIGIN_PANELS = 20
TAIL_LENGTH = 50.0
MAX_PANEL_WIDTH = 8.0
MAX_PANEL_RATIO = 3.0
# breakpoints beyond this are dropped: exp(-r) has underflowed the integrand
MAX_BREAKPOINT = 100.0


def sinpi(x: float) -> float:
    """sin(pi x), exactly zero at integers."""
    r = math.fmod(x, 2.0)
    if r == int(r):
        return 0.0
    return math.sin(math.pi * r)


def cospi(x: float) -> float:
    r = math.fmod(abs(x), 2.0)
    if r == 0.5 or r == 1.5:
        return 0.0
    return math.cos(math.pi * r)


def cut_panel_edges(alpha: float, x: float) -> tuple[float, list[float]]:
    """Breakpoints for the branch-cut integrand at argument ``-x``.

    Returns the split point ``ra`` (the origin region ``[0, ra]`` is handled
    in the substituted variable) and the panel edges on ``[ra, rmax]``.
    """
    ca = cospi(alpha)
    sa = abs(sinpi(alpha))
    ra = 1.0
    pts: list[float] = []
    if ca < 0.0:
        # near-pole of the integrand at r**alpha = -x cos(pi alpha)
        rp = (-x * ca) ** (1.0 / alpha)
        w = rp * sa / (alpha * (-ca))
        ra = min(1.0, 0.5 * rp)
        pts.append(rp)
        d = min(w, 0.25 * rp)
        while d < 2.0 * rp:
            if d < 0.5 * rp:
                pts.append(rp - d)
            pts.append(rp + d)
            d *= 3.0
        pts.append(rp + d)

    pts = sorted({p for p in pts if ra < p <= MAX_BREAKPOINT} | {ra})
    pts.append(pts[-1] + TAIL_LENGTH)

    edges = [pts[0]]
    for b in pts[1:]:
        a = edges[-1]
        while b > MAX_PANEL_RATIO * a or b - a > MAX_PANEL_WIDTH:
            a = min(MAX_PANEL_RATIO * a, a + MAX_PANEL_WIDTH)
            edges.append(a)
        edges.append(b)
    return ra, edges


def _cut_integrand(r, x, alpha, sb, sab, ca, sa):
    ra_ = r**alpha
    return np.exp(-r) * (ra_ * sb - x * sab) / ((ra_ + x * ca) ** 2 + (x * sa) ** 2)


def ml_cut_integral(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Branch-cut part of E_{alpha,beta}(-x) for x > 0.

    Requires ``alpha != 1`` and ``alpha - beta + 1 > 0``. Pole residues
    (present for ``alpha > 1``) are not included.
    """
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)

    nu = alpha - beta
    p = 1.0 / (nu + 1.0)
    sb = sinpi(beta)
    sab = sinpi(alpha - beta)
    ca = cospi(alpha)
    sa = sinpi(alpha)
    grading = MAX_PANEL_RATIO ** -np.arange(ORIGIN_PANELS, -1, -1, dtype=np.float64)

    for i, xi in enumerate(x.flat):
        ra, edges = cut_panel_edges(alpha, float(xi))

        ue = np.concatenate([[0.0], ra ** (nu + 1.0) * grading])
        a, b = ue[:-1, None], ue[1:, None]
        u = 0.5 * (b - a) * GL_NODES + 0.5 * (a + b)
        h = _cut_integrand(u**p, xi, alpha, sb, sab, ca, sa)
        total = p * np.sum(0.5 * (b - a) * (h @ GL_WEIGHTS)[:, None])

        e = np.asarray(edges)
        a, b = e[:-1, None], e[1:, None]
        r = 0.5 * (b - a) * GL_NODES + 0.5 * (a + b)
        f = _cut_integrand(r, xi, alpha, sb, sab, ca, sa) * r**nu
        total += np.sum(0.5 * (b - a) * (f @ GL_WEIGHTS)[:, None])

        out.flat[i] = total / math.pi

    return out


def l1_solve_uniform(
    c: np.ndarray, lam: np.ndarray, u0: np.ndarray, f: np.ndarray | None
) -> np.ndarray:
    """Implicit L1 stepping with Toeplitz history weights ``B[j, k] = c[j-1-k]``.

    Solves ``sum_k B[j,k] (u[k+1] - u[k]) = -lam u[j] + f[j]`` for
    ``j = 1..K`` with one row per mode.
    """
    n_modes = lam.shape[0]
    nsteps = c.shape[0]
    u = np.empty((n_modes, nsteps + 1))
    du = np.zeros((n_modes, nsteps))
    u[:, 0] = u0
    diag = c[0] + lam
    for j in range(1, nsteps + 1):
        rhs = c[0] * u[:, j - 1]
        if j > 1:
            rhs -= du[:, : j - 1] @ c[j - 1 : 0 : -1]
        if f is not None:
            rhs += f[:, j]
        u[:, j] = rhs / diag
        du[:, j - 1] = u[:, j] - u[:, j - 1]
    return u


def l1_solve_dense(
    b: np.ndarray, lam: np.ndarray, u0: np.ndarray, f: np.ndarray | None
) -> np.ndarray:
    """Same recurrence as :func:`l1_solve_uniform` with a dense ``(K+1, K)`` table."""
    n_modes = lam.shape[0]
    nsteps = b.shape[1]
    u = np.empty((n_modes, nsteps + 1))
    du = np.zeros((n_modes, nsteps))
    u[:, 0] = u0
    for j in range(1, nsteps + 1):
        bjj = b[j, j - 1]
        rhs = bjj * u[:, j - 1]
        if j > 1:
            rhs -= du[:, : j - 1] @ b[j, : j - 1]
        if f is not None:
            rhs += f[:, j]
        u[:, j] = rhs / (bjj + lam)
        du[:, j - 1] = u[:, j] - u[:, j - 1]
    return u
