# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: fused phase application, dipole reduction,
polynomial flow transport and local Lagrange interpolation.

Semantics match qhhg._kernels.pykernels exactly.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "cython"


def apply_phase(double complex[::1] psi, double complex[::1] phase):
    """In-place psi *= phase for 1D complex arrays."""
    cdef Py_ssize_t i, n = psi.shape[0]
    with nogil:
        for i in range(n):
            psi[i] = psi[i] * phase[i]


def apply_phase_mask(double complex[::1] psi, double complex[::1] phase,
                     double[::1] mask):
    """In-place psi *= phase * mask (mask real, e.g. an absorber)."""
    cdef Py_ssize_t i, n = psi.shape[0]
    with nogil:
        for i in range(n):
            psi[i] = psi[i] * phase[i] * mask[i]


def dipole_norm(double complex[::1] psi, double[::1] x, double dx):
    """Return (<x>, norm^2) of psi; <x> not divided by the norm."""
    cdef Py_ssize_t i, n = psi.shape[0]
    cdef double dens, acc_x = 0.0, acc_n = 0.0
    with nogil:
        for i in range(n):
            dens = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            acc_x += x[i] * dens
            acc_n += dens
    return acc_x * dx, acc_n * dx


cdef inline double _horner(double[::1] coeffs, double u) nogil:
    cdef Py_ssize_t k = coeffs.shape[0] - 1
    cdef double acc = coeffs[k]
    while k > 0:
        k -= 1
        acc = acc * u + coeffs[k]
    return acc


def polyval_ascending(double[::1] coeffs, double[::1] x):
    """Evaluate sum_k coeffs[k] * x**k (Horner) for an array of points."""
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _horner(coeffs, x[i])
    return out


def rk4_poly_flow(double[::1] q, double[::1] coeffs, double total_time,
                  Py_ssize_t nsub):
    """Transport points q along dq/ds = poly(q) for total_time via RK4."""
    cdef Py_ssize_t i, m, n = q.shape[0]
    cdef double h = total_time / nsub
    cdef double u, k1, k2, k3, k4
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            u = q[i]
            for m in range(nsub):
                k1 = _horner(coeffs, u)
                k2 = _horner(coeffs, u + 0.5 * h * k1)
                k3 = _horner(coeffs, u + 0.5 * h * k2)
                k4 = _horner(coeffs, u + h * k3)
                u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            o[i] = u
    return out


def lagrange_interp(double complex[::1] values, double x0, double dx,
                    double[::1] targets, int order):
    """Barycentric local Lagrange interpolation on a uniform grid.

    Stencil clamped at the edges; targets outside the grid return 0.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = targets.shape[0]
    cdef int p = order if order <= n else <int> n
    cdef Py_ssize_t i, j, start
    cdef double s_global, s_local, d, den, bwj, sign
    cdef double complex num
    cdef bint exact

    bw_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] bw = bw_arr
    bwj = 1.0
    for j in range(p):  # binomial(p-1, j) with alternating sign
        bw[j] = bwj if j % 2 == 0 else -bwj
        bwj = bwj * (p - 1 - j) / (j + 1)

    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    with nogil:
        for i in range(m):
            s_global = (targets[i] - x0) / dx
            if s_global < 0.0 or s_global > n - 1:
                o[i] = 0.0
                continue
            start = <Py_ssize_t> s_global - (p // 2 - 1)
            if start < 0:
                start = 0
            if start > n - p:
                start = n - p
            s_local = s_global - start
            num = 0.0
            den = 0.0
            exact = False
            for j in range(p):
                d = s_local - j
                if d < 1e-12 and d > -1e-12:
                    o[i] = values[start + j]
                    exact = True
                    break
                num = num + values[start + j] * (bw[j] / d)
                den = den + bw[j] / d
            if not exact:
                o[i] = num / den
    return out
