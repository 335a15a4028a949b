"""Quantum light-mode states and their two propagation routes.

Route (a): direct grid evolution of phi(q, t) under the dipole-coupled
mode Hamiltonian, Strang-split into a multiplicative phase and a
semi-Lagrangian advection step (symmetrized, so norm is conserved).

Route (b): the analytic generalized shift  exp[a f(q) d/dq] phi0(q)
= phi0(Q^-1[Q(q) + a]) with Q(q) = int_0^q dq'/f(q'), built from the
polynomial fit of the resonant dipole profile.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from numpy.polynomial.chebyshev import Chebyshev
from scipy.fft import fft, ifft

from qhhg import _kernels as kernels
from qhhg import units
from qhhg.errors import (
    DomainError,
    ExtrapolationError,
    NumericalError,
    ParameterError,
    SingularFlowError,
    SupportError,
)
from qhhg.response import ResonantProfile, SeriesCoefficients, fit_series

INTERP_ORDER = 12


@dataclass(frozen=True)
class QuadratureGrid:
    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 4 or (self.n_points & (self.n_points - 1)) != 0:
            raise ParameterError("n_points must be a power of two >= 4")
        if self.q_max <= self.q_min:
            raise ParameterError("q_max must exceed q_min")

    @property
    def dq(self):
        return (self.q_max - self.q_min) / (self.n_points - 1)

    @property
    def q(self):
        return np.linspace(self.q_min, self.q_max, self.n_points)

    def wavenumbers(self):
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dq)


@dataclass
class LightState:
    grid: QuadratureGrid
    amplitudes: np.ndarray

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dq))

    def normalized(self):
        return LightState(self.grid, self.amplitudes / self.norm())

    def moments(self):
        """(mean_q, mean_p, var_q, var_p, cov_qp) via spectral derivatives."""
        q = self.grid.q
        dq = self.grid.dq
        phi = self.amplitudes / self.norm()
        dens = np.abs(phi) ** 2
        mean_q = float(np.dot(q, dens) * dq)
        var_q = float(np.dot((q - mean_q) ** 2, dens) * dq)
        k = self.grid.wavenumbers()
        phi_k = fft(phi)
        dens_k = np.abs(phi_k) ** 2
        dens_k /= dens_k.sum()
        mean_p = float(np.dot(k, dens_k))
        var_p = float(np.dot((k - mean_p) ** 2, dens_k))
        dphi = ifft(1j * k * phi_k)
        s = np.sum(np.conj(phi) * q * dphi) * dq
        cov = float(np.imag(s)) - mean_q * mean_p
        return mean_q, mean_p, var_q, var_p, cov


@dataclass
class LightEnsemble:
    """Incoherent mixture: weighted pure components sharing one grid."""

    components: list  # [(weight, LightState), ...]

    @property
    def grid(self):
        return self.components[0][1].grid

    def density_matrix(self):
        dim = self.grid.n_points
        rho = np.zeros((dim, dim), dtype=np.complex128)
        for w, st in self.components:
            phi = st.amplitudes / st.norm()
            rho += w * np.outer(phi, np.conj(phi))
        return rho


def _hermite_function(n, q):
    h = np.polynomial.hermite.hermval(q, [0.0] * n + [1.0])
    norm = 1.0 / np.sqrt(2.0**n * math.factorial(n) * np.sqrt(np.pi))
    return norm * h * np.exp(-0.5 * q**2)


def _check_support(amps, grid, tol=1e-10):
    peak = np.abs(amps).max()
    if peak == 0:
        raise ParameterError("state is identically zero")
    edge = max(abs(amps[0]), abs(amps[-1]))
    if edge > tol * peak:
        raise SupportError(
            f"state amplitude at the grid edge is {edge / peak:.1e} of the peak; widen the grid"
        )


def build_initial_state(kind, grid, q0=0.0, p0=0.0, weights=None,
                        coherent_superposition=False):
    """Initial light state: vacuum, coherent, Fock, or a Fock mixture.

    fock_mixture weights {n: w_n} are probabilities of an incoherent
    mixture by default (returns a LightEnsemble); with
    coherent_superposition=True they become |amplitude|^2 fractions of a
    pure superposition with real positive amplitudes.
    """
    q = grid.q
    if kind == "vacuum":
        amps = np.pi**-0.25 * np.exp(-0.5 * q**2) + 0j
    elif kind == "coherent":
        amps = np.pi**-0.25 * np.exp(-0.5 * (q - q0) ** 2) * np.exp(1j * p0 * q)
    elif kind == "fock":
        amps = _hermite_function(int(q0), q) + 0j  # q0 doubles as n here
    elif kind == "fock_mixture":
        if not weights:
            raise ParameterError("fock_mixture requires weights {n: w}")
        total = float(sum(weights.values()))
        if total <= 0 or any(w < 0 for w in weights.values()):
            raise ParameterError("weights must be nonnegative with positive sum")
        probs = {int(n): w / total for n, w in weights.items()}
        if coherent_superposition:
            amps = np.zeros_like(q, dtype=np.complex128)
            for n, p in sorted(probs.items()):
                amps += np.sqrt(p) * _hermite_function(n, q)
            amps /= np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dq)
        else:
            comps = []
            for n, p in sorted(probs.items()):
                if p == 0:
                    continue
                fock = np.asarray(_hermite_function(n, q), dtype=np.complex128)
                fock /= np.sqrt(np.sum(np.abs(fock) ** 2) * grid.dq)
                _check_support(fock, grid)
                comps.append((p, LightState(grid, fock)))
            return LightEnsemble(comps)
    else:
        raise ParameterError(f"unknown initial state kind {kind!r}")

    amps = np.asarray(amps, dtype=np.complex128)
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dq)
    _check_support(amps, grid)
    return LightState(grid, amps)


def fock_state(n, grid):
    return build_initial_state("fock", grid, q0=n)


# ---------------------------------------------------------------------------
# grid propagation
# ---------------------------------------------------------------------------


@dataclass
class GridPropagation:
    state: LightState
    norm_drift: float
    history: list | None = None


def _advect_unitary(phi, grid, gcoeffs, dt):
    """One symmetrized advection step  exp[dt/2 (g d/dq + d/dq g)] phi.

    Characteristics xi = flow of dxi/ds = g(xi) over dt are integrated by
    RK4 together with the Jacobian J = dxi/dq (dJ/ds = g'(xi) J), and
    phi_new = sqrt(J) * phi(xi): exactly norm-preserving in the continuum.
    """
    q = grid.q
    gprime = npoly.polyder(gcoeffs)
    u = q.copy()
    jac = np.ones_like(q)
    h = dt
    # single RK4 step is plenty: |g| dt << grid span per step
    k1 = npoly.polyval(u, gcoeffs)
    j1 = npoly.polyval(u, gprime) * jac
    k2 = npoly.polyval(u + 0.5 * h * k1, gcoeffs)
    j2 = npoly.polyval(u + 0.5 * h * k1, gprime) * (jac + 0.5 * h * j1)
    k3 = npoly.polyval(u + 0.5 * h * k2, gcoeffs)
    j3 = npoly.polyval(u + 0.5 * h * k2, gprime) * (jac + 0.5 * h * j2)
    k4 = npoly.polyval(u + h * k3, gcoeffs)
    j4 = npoly.polyval(u + h * k3, gprime) * (jac + h * j3)
    xi = u + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    jac = jac + (h / 6.0) * (j1 + 2 * j2 + 2 * j3 + j4)
    out = kernels.lagrange_interp(phi, grid.q_min, grid.dq, xi, INTERP_ORDER)
    out *= np.sqrt(np.abs(jac))
    return out


def _advect_shift(phi, grid, shift):
    """Exact FFT translation phi(q) -> phi(q + shift) for constant velocity."""
    k = grid.wavenumbers()
    return ifft(fft(phi) * np.exp(1j * k * shift))


def propagate_light_grid(state, dipole, field, mode, subsample=1,
                         keep_history=False, history_every=200,
                         fit_order=None, fit_beta=None):
    """Grid evolution of the light state driven by the dipole response.

    dipole: SeriesCoefficients, or a DipoleSurface (fitted internally with
    fit_order terms; requires fit_beta=mode.beta > 0).  The time axis of
    the dipole data sets the stepping; `subsample` coarsens it.
    """
    if hasattr(dipole, "traces"):  # a DipoleSurface
        beta = mode.beta if fit_beta is None else fit_beta
        if beta <= 0:
            raise ParameterError("surface input needs a positive beta for the series fit")
        order = fit_order if fit_order is not None else max(0, min(5, dipole.q_values.size - 2))
        series = fit_series(dipole, beta, order)
    elif isinstance(dipole, SeriesCoefficients):
        series = dipole
    else:
        raise ParameterError("dipole must be a DipoleSurface or SeriesCoefficients")

    grid = state.grid
    q = grid.q
    dq = grid.dq
    phi = state.amplitudes.astype(np.complex128).copy()
    norm0 = np.sqrt(np.sum(np.abs(phi) ** 2) * dq)
    phi /= norm0

    n_t = series.f_k.shape[1]
    if subsample < 1 or (n_t - 1) % subsample != 0:
        raise ParameterError("subsample must divide the number of dipole steps")
    dt = series.dt * subsample
    n_steps = (n_t - 1) // subsample

    omega_over_c = mode.omega / units.C_AU
    beta = mode.beta
    order = series.order
    beta_powers = beta ** np.arange(order + 1)
    q_powers = np.vander(q, order + 1, increasing=True)  # (n_q, order+1)

    f_values = np.asarray(field.values, dtype=float)
    if f_values.shape[0] != n_t:
        raise ParameterError("field and dipole series disagree on the time axis")

    u_lo, u_hi = series.u_range
    history = [] if keep_history else None
    check_every = 50

    for n in range(n_steps):
        i0 = n * subsample
        i1 = i0 + subsample
        t_mid = (i0 + 0.5 * subsample) * series.dt
        fk_mid = 0.5 * (series.f_k[:, i0] + series.f_k[:, i1])
        f_mid = 0.5 * (f_values[i0] + f_values[i1])

        d_mid = q_powers @ (fk_mid * beta_powers)  # d(q, t_mid) on the grid
        phase = np.exp(
            (-0.5j * dt)
            * d_mid
            * (f_mid + omega_over_c * beta * q * np.sin(mode.omega * t_mid))
        )
        gcoeffs = (omega_over_c * beta * np.cos(mode.omega * t_mid)) * (fk_mid * beta_powers)

        kernels.apply_phase(phi, phase)
        if order == 0:
            phi = _advect_shift(phi, grid, gcoeffs[0] * dt)
        else:
            phi = _advect_unitary(phi, grid, gcoeffs, dt)
        kernels.apply_phase(phi, phase)

        if (n + 1) % check_every == 0 or n == n_steps - 1:
            nrm = np.sqrt(np.sum(np.abs(phi) ** 2) * dq)
            if not np.isfinite(nrm):
                raise NumericalError(f"light propagation produced NaN at step {n + 1}")
            if abs(nrm - 1.0) > 1e-3:
                raise NumericalError(
                    f"norm drift {abs(nrm - 1.0):.2e} at step {n + 1}: ordering scheme failed"
                )
            if order >= 1:
                sup = np.abs(phi) > 1e-10 * np.abs(phi).max()
                q_sup = q[sup]
                if beta * q_sup.min() < u_lo - 1e-9 or beta * q_sup.max() > u_hi + 1e-9:
                    raise ExtrapolationError(
                        "state support left the q-range covered by the dipole fit"
                    )
        if keep_history and (n % history_every == 0 or n == n_steps - 1):
            history.append((t_mid + 0.5 * dt, phi.copy()))

    drift = abs(float(np.sqrt(np.sum(np.abs(phi) ** 2) * dq)) - 1.0)
    return GridPropagation(state=LightState(grid, phi), norm_drift=drift, history=history)


# ---------------------------------------------------------------------------
# analytic flow route
# ---------------------------------------------------------------------------


@dataclass
class FlowMap:
    """Realization of exp[a f(q) d/dq] through Q(q) = int dq'/f(q')."""

    f_coefficients: np.ndarray
    a: float
    domain: tuple
    inverse_method: str = "newton_per_point"
    q_cheb: Chebyshev | None = None
    reversion_order: int = 14
    _reversion_cache: np.ndarray | None = None

    def f_values(self, q):
        return npoly.polyval(np.asarray(q, dtype=float), self.f_coefficients)

    def q_of(self, q):
        return self.q_cheb(np.asarray(q, dtype=float))

    def q_range(self):
        return float(self.q_cheb(self.domain[0])), float(self.q_cheb(self.domain[1]))

    def inverse(self, y):
        if self.inverse_method == "newton_per_point":
            return self._inverse_newton(y)
        if self.inverse_method == "series_reversion":
            return self._inverse_reversion(y)
        raise ParameterError(f"unknown inverse method {self.inverse_method!r}")

    def _inverse_newton(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.domain
        y_lo, y_hi = self.q_range()
        valid = (y >= min(y_lo, y_hi) - 1e-12) & (y <= max(y_lo, y_hi) + 1e-12)
        u = np.clip(np.interp(y, [y_lo, y_hi], [lo, hi]), lo, hi)
        scale = max(1.0, np.abs(y[valid]).max() if valid.any() else 1.0)
        for _ in range(60):
            r = self.q_cheb(u) - y
            if np.abs(r[valid]).max() < 1e-14 * scale:
                break
            u = np.clip(u - r * self.f_values(u), lo, hi)
        else:
            worst = np.abs(self.q_cheb(u) - y)[valid].max()
            raise NumericalError(f"flow inverse did not converge (residual {worst:.2e})")
        return u, valid

    def _inverse_reversion(self, y):
        y = np.asarray(y, dtype=float)
        lo, hi = self.domain
        center = 0.5 * (lo + hi)
        if self._reversion_cache is None:
            rev = _reversion_series(self.f_coefficients, center, self.reversion_order)
            object.__setattr__(self, "_reversion_cache", rev)
        rev = self._reversion_cache
        y0 = float(self.q_cheb(center))
        u = center + npoly.polyval(y - y0, rev)
        y_lo, y_hi = self.q_range()
        valid = (y >= min(y_lo, y_hi) - 1e-12) & (y <= max(y_lo, y_hi) + 1e-12)
        return np.clip(u, lo, hi), valid


def _shifted_poly(coeffs, center):
    """Coefficients of p(center + s) as a polynomial in s."""
    p = npoly.Polynomial(coeffs)
    return p(npoly.Polynomial([center, 1.0])).coef


def _reversion_series(f_coeffs, center, order):
    """Power series of Q^-1 about Q(center), where Q' = 1/f.

    Returns ascending coefficients r with  Q^-1(Q(center)+y) = center +
    sum_n r_n y^n  (r_0 = 0).
    """
    a = _shifted_poly(f_coeffs, center)
    if abs(a[0]) < 1e-14:
        raise SingularFlowError("f vanishes at the series expansion point")
    n_terms = order + 1
    # reciprocal series b = 1/f(center+s)
    b = np.zeros(n_terms)
    b[0] = 1.0 / a[0]
    a_pad = np.zeros(n_terms)
    a_pad[: min(len(a), n_terms)] = a[:n_terms]
    for n in range(1, n_terms):
        b[n] = -np.dot(a_pad[1 : n + 1], b[n - 1 :: -1]) / a_pad[0]
    # Q(center+s) - Q(center) = integral of b
    g = np.zeros(n_terms + 1)
    g[1:] = b / np.arange(1, n_terms + 1)
    # revert g: find r with g(r(y)) = y, via coefficient recursion
    r = np.zeros(n_terms + 1)
    r[1] = 1.0 / g[1]
    r_pow = np.zeros((n_terms + 1, n_terms + 1))  # r^k truncated
    r_pow[0, 0] = 1.0
    r_pow[1] = r
    for n in range(2, n_terms + 1):
        # coefficient of y^n in sum_k g_k r(y)^k must vanish
        for k in range(2, n + 1):
            conv = np.zeros(n_terms + 1)
            prev = r_pow[k - 1]
            for i in range(n + 1):
                if prev[i] == 0.0:
                    continue
                jmax = n - i
                conv[i : i + jmax + 1] += prev[i] * r[: jmax + 1]
            r_pow[k] = conv
        acc = 0.0
        for k in range(2, n + 1):
            acc += g[k] * r_pow[k][n]
        r[n] = -acc / g[1]
        # refresh powers with the new coefficient for the next round
        r_pow[1] = r
    return r


def flow_amplitude(mode, t_int, n_emitters=1):
    """a = N_e * beta * (Omega/c) * t_int / 2.

    The 1/2 pairs with the (2/t_int) normalization of the resonant dipole
    so that a * f(q) equals the time-integrated advection velocity.
    """
    return n_emitters * mode.beta * (mode.omega / units.C_AU) * t_int / 2.0


def build_flow_map(profile, a, domain=None, inverse_method="newton_per_point",
                   roundtrip_tol=1e-10):
    """Flow map for the fitted profile with transport amplitude a.

    The antiderivative Q is represented as a Chebyshev series of 1/f,
    integrated term by term; the round-trip Q^-1(Q(q)) = q is verified on
    a probe grid before the map is returned.
    """
    if profile.fit_coefficients is None:
        raise ParameterError("profile must be fitted (fit_fomega) before building a flow map")
    coeffs = np.asarray(profile.fit_coefficients, dtype=float)
    if domain is None:
        domain = profile.domain
    lo, hi = float(domain[0]), float(domain[1])
    if hi <= lo:
        raise ParameterError("domain must have positive length")

    fine = np.linspace(lo, hi, 8001)
    fvals = npoly.polyval(fine, coeffs)
    if np.any(fvals == 0.0) or np.any(np.sign(fvals[:-1]) != np.sign(fvals[1:])):
        idx = int(np.argmin(np.abs(fvals)))
        raise SingularFlowError(f"f_Omega crosses zero near q={fine[idx]:.4f} inside the domain")

    inv_f = lambda q: 1.0 / npoly.polyval(q, coeffs)
    scale = np.abs(1.0 / fvals).max()
    best = None
    for deg in (64, 128, 256, 512):
        c = Chebyshev.interpolate(inv_f, deg, domain=[lo, hi])
        err = np.abs(c(fine) - 1.0 / fvals).max()
        if best is None or err < best[1]:
            best = (c, err)
        if err < 1e-13 * scale:
            break
    c, err = best
    if err > 1e-9 * scale:
        raise NumericalError(f"could not represent 1/f to tolerance (err {err:.2e})")
    q_cheb = c.integ(1, lbnd=lo)

    probe = np.linspace(lo, hi, 257)
    orders = (16, 24, 32, 48) if inverse_method == "series_reversion" else (0,)
    err = np.inf
    for rev_order in orders:
        fmap = FlowMap(
            f_coefficients=coeffs,
            a=float(a),
            domain=(lo, hi),
            inverse_method=inverse_method,
            q_cheb=q_cheb,
            reversion_order=rev_order or 14,
        )
        back, valid = fmap.inverse(fmap.q_of(probe))
        err = np.abs(back[valid] - probe[valid]).max()
        if err <= roundtrip_tol:
            return fmap
    hint = (
        "; the reversion series does not converge on this domain, use "
        "inverse_method='newton_per_point'"
        if inverse_method == "series_reversion"
        else ""
    )
    raise NumericalError(
        f"flow map round-trip error {err:.2e} above {roundtrip_tol:.0e}{hint}"
    )


@dataclass
class FlowResult:
    state: LightState
    renorm_factor: float


def apply_flow(state, fmap, interp_order=INTERP_ORDER, support_tol=1e-10):
    """phi0(Q^-1[Q(q) + a]) on the state's grid, renormalized.

    The input support, transported by the flow, must stay inside both the
    grid and the map domain; otherwise DomainError.
    """
    grid = state.grid
    q = grid.q
    phi0 = state.amplitudes / state.norm()

    peak = np.abs(phi0).max()
    sup = np.where(np.abs(phi0) > support_tol * peak)[0]
    s_lo, s_hi = q[sup[0]], q[sup[-1]]
    lo, hi = fmap.domain
    if s_lo < lo or s_hi > hi:
        raise DomainError(
            f"initial support [{s_lo:.3f}, {s_hi:.3f}] exceeds the map domain [{lo:.3f}, {hi:.3f}]"
        )
    ends, ok = fmap.inverse(fmap.q_of(np.array([s_lo, s_hi])) - fmap.a)
    if not ok.all():
        raise DomainError("transported support leaves the flow-map domain")
    new_lo, new_hi = float(ends.min()), float(ends.max())
    if new_lo < max(grid.q_min, lo) or new_hi > min(grid.q_max, hi):
        raise DomainError(
            f"transported support [{new_lo:.3f}, {new_hi:.3f}] escapes the grid or domain"
        )

    inside = (q >= lo) & (q <= hi)
    targets = fmap.q_of(q[inside]) + fmap.a
    u, valid = fmap.inverse(targets)
    out = np.zeros_like(phi0)
    vals = kernels.lagrange_interp(phi0, grid.q_min, grid.dq, u[valid], interp_order)
    idx_inside = np.where(inside)[0]
    out[idx_inside[valid]] = vals
    raw_norm = float(np.sqrt(np.sum(np.abs(out) ** 2) * grid.dq))
    if raw_norm < 1e-12:
        raise NumericalError("flow produced an empty state (support mismatch)")
    out /= raw_norm
    return FlowResult(state=LightState(grid, out), renorm_factor=1.0 / raw_norm)


def ensemble_response(profile, ensemble):
    """Collective response of n identical emitters: d_Omega scaled by N_e."""
    if ensemble.n_emitters < 1:
        raise ParameterError("n_emitters must be >= 1")
    ne = float(ensemble.n_emitters)
    return dataclasses.replace(
        profile,
        d_omega=profile.d_omega * ne,
        fit_coefficients=None
        if profile.fit_coefficients is None
        else profile.fit_coefficients * ne,
        residual=profile.residual * ne,
    )


@dataclass(frozen=True)
class EnsembleSpec:
    n_emitters: float
    per_emitter_beta: float
    emitter_model: str = ""

    def __post_init__(self):
        if self.n_emitters < 1:
            raise ParameterError("n_emitters must be >= 1")


def export_state_csv(state, csv_path, json_path=None, meta=None):
    with open(csv_path, "w") as fh:
        fh.write("q_au,re_phi,im_phi\n")
        for qv, av in zip(state.grid.q, state.amplitudes):
            fh.write(f"{qv!r},{av.real!r},{av.imag!r}\n")
    if json_path is not None:
        import json as _json

        payload = {"q_min_au": state.grid.q_min, "q_max_au": state.grid.q_max,
                   "n_points": state.grid.n_points}
        if meta:
            payload.update(meta)
        with open(json_path, "w") as fh:
            _json.dump(payload, fh, indent=2, sort_keys=True)
