"""Pure-NumPy implementations of the hot kernels.

Mirrors qhhg._kernels._core (the Cython extension) operation for
operation; used automatically when the extension is not built.
"""

import numpy as np

IMPLEMENTATION = "python"


def apply_phase(psi, phase):
    """In-place psi *= phase for 1D complex arrays."""
    psi *= phase


def apply_phase_mask(psi, phase, mask):
    """In-place psi *= phase * mask (mask real, e.g. an absorber)."""
    psi *= phase
    psi *= mask


def dipole_norm(psi, x, dx):
    """Return (<x>, norm^2) of psi on the uniform grid x with spacing dx.

    <x> is NOT divided by the norm; callers decide how to normalize.
    """
    density = np.abs(psi) ** 2
    return float(np.dot(x, density) * dx), float(density.sum() * dx)


def polyval_ascending(coeffs, x):
    """Evaluate sum_k coeffs[k] * x**k (Horner) for an array of points."""
    out = np.full_like(x, coeffs[-1], dtype=float)
    for c in coeffs[-2::-1]:
        out *= x
        out += c
    return out


def rk4_poly_flow(q, coeffs, total_time, nsub):
    """Transport points q along dq/ds = poly(q) for total_time via RK4.

    coeffs are ascending polynomial coefficients of the velocity field;
    nsub RK4 substeps are taken.  Returns the transported points.
    """
    h = total_time / nsub
    u = np.array(q, dtype=float, copy=True)
    for _ in range(nsub):
        k1 = polyval_ascending(coeffs, u)
        k2 = polyval_ascending(coeffs, u + 0.5 * h * k1)
        k3 = polyval_ascending(coeffs, u + 0.5 * h * k2)
        k4 = polyval_ascending(coeffs, u + h * k3)
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return u


def lagrange_interp(values, x0, dx, targets, order):
    """Interpolate complex samples on a uniform grid at arbitrary targets.

    Local Lagrange interpolation of `order` points (barycentric form),
    stencil clamped at the edges; targets outside the grid return 0.
    """
    n = values.shape[0]
    if order > n:
        order = n
    t = np.asarray(targets, dtype=float)
    s_global = (t - x0) / dx
    inside = (s_global >= 0.0) & (s_global <= n - 1)

    start = np.floor(s_global).astype(np.int64) - (order // 2 - 1)
    np.clip(start, 0, n - order, out=start)
    s_local = s_global - start

    offsets = np.arange(order, dtype=float)
    # barycentric weights for uniformly spaced nodes 0..order-1
    from math import comb

    bw = np.array([(-1.0) ** j * comb(order - 1, j) for j in range(order)])

    d = s_local[:, None] - offsets[None, :]
    on_node = np.abs(d) < 1e-12
    d = np.where(on_node, 1.0, d)
    w = bw / d

    idx = start[:, None] + np.arange(order)[None, :]
    vals = values[idx]

    num = (w * vals).sum(axis=1)
    den = w.sum(axis=1)
    out = num / den

    hit = on_node.any(axis=1)
    if hit.any():
        j_hit = on_node[hit].argmax(axis=1)
        out[hit] = vals[hit, j_hit]
    out[~inside] = 0.0
    return out
