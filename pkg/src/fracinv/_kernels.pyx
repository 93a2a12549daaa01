# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, fmin, fmod, pow, sin, M_PI

cnp.import_array()

from fracinv._kernels_py import GL_NODES, GL_WEIGHTS

cdef enum:
    NGL = 16
    ORIGIN_PANELS = 20
    MAX_EDGES = 512
cdef double TAIL_LENGTH = 50.0
cdef double MAX_PANEL_WIDTH = 8.0
cdef double MAX_PANEL_RATIO = 3.0
cdef double MAX_BREAKPOINT = 100.0

cdef double _xg[NGL]
cdef double _wg[NGL]
for _i in range(NGL):
    _xg[_i] = GL_NODES[_i]
    _wg[_i] = GL_WEIGHTS[_i]


cdef double _sinpi(double x) nogil:
    cdef double r = fmod(x, 2.0)
    if r == <double>(<long>r):
        return 0.0
    return sin(M_PI * r)


cdef double _cospi(double x) nogil:
    cdef double r = fmod(fabs(x), 2.0)
    if r == 0.5 or r == 1.5:
        return 0.0
    return cos(M_PI * r)


cdef inline double _integrand(double r, double x, double alpha,
                              double sb, double sab, double ca, double sa) nogil:
    cdef double ra_ = pow(r, alpha)
    cdef double d1 = ra_ + x * ca
    cdef double d2 = x * sa
    return exp(-r) * (ra_ * sb - x * sab) / (d1 * d1 + d2 * d2)


cdef void _insert_sorted(double *pts, int *n, double v) nogil:
    cdef int i = n[0]
    while i > 0 and pts[i - 1] > v:
        pts[i] = pts[i - 1]
        i -= 1
    pts[i] = v
    n[0] += 1


cdef int _panel_edges(double alpha, double x, double *ra_out, double *edges) nogil:
    cdef double ca = _cospi(alpha)
    cdef double sa = fabs(_sinpi(alpha))
    cdef double ra = 1.0
    cdef double rp, w, d, a, b
    cdef double raw[128]
    cdef double pts[128]
    cdef int nraw = 0, npts = 0, nedges = 0, i

    if ca < 0.0:
        rp = pow(-x * ca, 1.0 / alpha)
        w = rp * sa / (alpha * (-ca))
        ra = fmin(1.0, 0.5 * rp)
        raw[nraw] = rp
        nraw += 1
        d = fmin(w, 0.25 * rp)
        while d < 2.0 * rp and nraw < 120:
            if d < 0.5 * rp:
                raw[nraw] = rp - d
                nraw += 1
            raw[nraw] = rp + d
            nraw += 1
            d *= 3.0
        raw[nraw] = rp + d
        nraw += 1

    _insert_sorted(pts, &npts, ra)
    for i in range(nraw):
        if raw[i] > ra and raw[i] <= MAX_BREAKPOINT:
            _insert_sorted(pts, &npts, raw[i])
    pts[npts] = pts[npts - 1] + TAIL_LENGTH
    npts += 1

    edges[0] = pts[0]
    nedges = 1
    for i in range(1, npts):
        b = pts[i]
        if b == edges[nedges - 1]:
            continue
        a = edges[nedges - 1]
        while (b > MAX_PANEL_RATIO * a or b - a > MAX_PANEL_WIDTH) and nedges < MAX_EDGES - 2:
            a = fmin(MAX_PANEL_RATIO * a, a + MAX_PANEL_WIDTH)
            edges[nedges] = a
            nedges += 1
        if nedges >= MAX_EDGES - 1:
            break
        edges[nedges] = b
        nedges += 1

    ra_out[0] = ra
    return nedges


cdef double _cut_single(double alpha, double beta, double x) nogil:
    cdef double nu = alpha - beta
    cdef double p = 1.0 / (nu + 1.0)
    cdef double sb = _sinpi(beta)
    cdef double sab = _sinpi(alpha - beta)
    cdef double ca = _cospi(alpha)
    cdef double sa = _sinpi(alpha)
    cdef double edges[MAX_EDGES]
    cdef double ra, ua, a, b, half, mid, u, r, panel, total = 0.0
    cdef int nedges, k, q

    nedges = _panel_edges(alpha, x, &ra, edges)

    # origin region in u = r**(nu + 1)
    ua = pow(ra, nu + 1.0)
    for k in range(ORIGIN_PANELS + 1):
        b = ua * pow(MAX_PANEL_RATIO, -(ORIGIN_PANELS - k))
        a = 0.0 if k == 0 else ua * pow(MAX_PANEL_RATIO, -(ORIGIN_PANELS - k + 1))
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        panel = 0.0
        for q in range(NGL):
            u = half * _xg[q] + mid
            panel += _wg[q] * _integrand(pow(u, p), x, alpha, sb, sab, ca, sa)
        total += p * half * panel

    for k in range(nedges - 1):
        a = edges[k]
        b = edges[k + 1]
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        panel = 0.0
        for q in range(NGL):
            r = half * _xg[q] + mid
            panel += _wg[q] * _integrand(r, x, alpha, sb, sab, ca, sa) * pow(r, nu)
        total += half * panel

    return total / M_PI


def ml_cut_integral(double alpha, double beta, x):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xs)
    cdef Py_ssize_t i, n = xs.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _cut_single(alpha, beta, xs[i])
    return out.reshape(np.shape(x))


cdef void _l1_sweep(double[:, ::1] uv, double[:, ::1] du, double[::1] rhs,
                    double[::1] lv, double[:, ::1] fv, bint has_f,
                    const double* row, Py_ssize_t j, double diag) nogil:
    # one implicit step; ``row[k]`` is the history weight of increment k.
    # The inner loops run over independent modes, so they vectorize without
    # reassociating any sum.
    cdef Py_ssize_t n, k, nmodes = lv.shape[0]
    cdef double w
    for n in range(nmodes):
        rhs[n] = diag * uv[n, j - 1]
    for k in range(j - 1):
        w = row[k]
        for n in range(nmodes):
            rhs[n] -= w * du[k, n]
    for n in range(nmodes):
        if has_f:
            rhs[n] += fv[n, j]
        uv[n, j] = rhs[n] / (diag + lv[n])
        du[j - 1, n] = uv[n, j] - uv[n, j - 1]


def l1_solve_uniform(c, lam, u0, f):
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] u0v = np.ascontiguousarray(u0, dtype=np.float64)
    cdef Py_ssize_t nmodes = lv.shape[0], nsteps = cv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] u = np.empty((nmodes, nsteps + 1))
    cdef double[:, ::1] uv = u
    # increments stored time-major: du[k, n]
    cdef double[:, ::1] du = np.zeros((nsteps, nmodes))
    cdef double[::1] rhs = np.empty(nmodes)
    # reversed generator: weight of increment k at step j is crev[nsteps - j + k]
    cdef double[::1] crev = np.ascontiguousarray(np.asarray(cv)[::-1])
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64) if f is not None \
        else np.zeros((1, 1))
    cdef bint has_f = f is not None
    cdef Py_ssize_t n, j
    with nogil:
        for n in range(nmodes):
            uv[n, 0] = u0v[n]
        for j in range(1, nsteps + 1):
            _l1_sweep(uv, du, rhs, lv, fv, has_f, &crev[nsteps - j], j, cv[0])
    return u


def l1_solve_dense(b, lam, u0, f):
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef double[::1] u0v = np.ascontiguousarray(u0, dtype=np.float64)
    cdef Py_ssize_t nmodes = lv.shape[0], nsteps = bv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] u = np.empty((nmodes, nsteps + 1))
    cdef double[:, ::1] uv = u
    cdef double[:, ::1] du = np.zeros((nsteps, nmodes))
    cdef double[::1] rhs = np.empty(nmodes)
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64) if f is not None \
        else np.zeros((1, 1))
    cdef bint has_f = f is not None
    cdef Py_ssize_t n, j
    with nogil:
        for n in range(nmodes):
            uv[n, 0] = u0v[n]
        for j in range(1, nsteps + 1):
            _l1_sweep(uv, du, rhs, lv, fv, has_f, &bv[j, 0], j, bv[j, j - 1])
    return u
