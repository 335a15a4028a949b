"""Dipole response over a grid of quadrature values.

A sweep runs one electron propagation per sampled q, giving the surface
<x>(q, t).  From it we extract a power series in (beta*q) at each time
sample, the resonant cosine coefficient d_Omega(q), and a polynomial fit
f_Omega(q) that feeds the analytic flow propagator.  All least squares go
through a Chebyshev-scaled basis to keep the Vandermonde conditioning
tame.
"""

import dataclasses
import hashlib
import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as cheb

from qhhg.electron import ElectronRunSpec, propagate_electron
from qhhg.errors import FitError, NumericalError, ParameterError, SingularFlowError

VACUUM_SIGMA = np.sqrt(0.5)


@dataclass(frozen=True)
class QSampling:
    """Quadrature sample points for the parametric sweep."""

    q_values: np.ndarray
    centered_on: float = 0.0
    span_sigmas: float = 4.0

    def __post_init__(self):
        q = np.asarray(self.q_values, dtype=float)
        object.__setattr__(self, "q_values", q)
        if q.ndim != 1 or q.size < 1:
            raise ParameterError("q_values must be a 1D array")
        if q.size > 1 and not np.all(np.diff(q) > 0):
            raise ParameterError("q_values must be strictly increasing")
        if q.size > 1:
            reach = 4.0 * VACUUM_SIGMA * 0.999
            if self.centered_on - q[0] < reach or q[-1] - self.centered_on < reach:
                raise ParameterError(
                    "q sampling must span at least +-4 vacuum sigmas around the center"
                )

    @classmethod
    def uniform(cls, n_points, center=0.0, span_sigmas=4.0, extend_to=None):
        """n_points uniform samples over center +- span_sigmas * sigma_vac.

        extend_to=(lo, hi) widens the window (e.g. to cover an expected
        displacement) while keeping the +-4 sigma minimum.
        """
        lo = center - span_sigmas * VACUUM_SIGMA
        hi = center + span_sigmas * VACUUM_SIGMA
        if extend_to is not None:
            lo = min(lo, extend_to[0])
            hi = max(hi, extend_to[1])
        return cls(np.linspace(lo, hi, n_points), centered_on=center, span_sigmas=span_sigmas)


@dataclass
class DipoleSurface:
    q_values: np.ndarray
    traces: np.ndarray  # (n_q, n_t)
    dt: float
    norms: np.ndarray | None = None

    @property
    def times(self):
        return np.arange(self.traces.shape[1]) * self.dt


@dataclass
class SeriesCoefficients:
    """f_k(t): power-series coefficients of <x> in u = beta*q."""

    order: int
    f_k: np.ndarray  # (order+1, n_t)
    dt: float
    u_range: tuple
    residual: np.ndarray  # rms residual per time sample

    @property
    def times(self):
        return np.arange(self.f_k.shape[1]) * self.dt

    def evaluate(self, u, index):
        """Series value at scaled coordinate(s) u for time sample `index`."""
        coeffs = self.f_k[:, index]
        out = np.full_like(np.asarray(u, dtype=float), coeffs[-1])
        for c in coeffs[-2::-1]:
            out = out * u + c
        return out


@dataclass
class ResonantProfile:
    """Samples of d_Omega(q) and, once fitted, the polynomial f_Omega(q)."""

    q_values: np.ndarray
    d_omega: np.ndarray
    fit_coefficients: np.ndarray | None = None  # ascending powers of q
    fit_kind: str = "polynomial"
    residual: float = 0.0
    domain: tuple | None = None

    def f_values(self, q):
        if self.fit_coefficients is None:
            raise FitError("profile has no fit; call fit_fomega first")
        return np.polynomial.polynomial.polyval(np.asarray(q, dtype=float), self.fit_coefficients)


def _cache_key(run_spec):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(run_spec.resolved_potential()).tobytes())
    h.update(np.ascontiguousarray(run_spec.initial_amplitudes()).tobytes())
    h.update(np.ascontiguousarray(run_spec.field.values).tobytes())
    meta = (
        run_spec.field.dt,
        run_spec.grid.x_min,
        run_spec.grid.x_max,
        run_spec.grid.n_points,
        run_spec.mode.omega,
        run_spec.mode.beta,
        run_spec.beta_q,
        run_spec.absorber_width,
    )
    h.update(repr(meta).encode())
    return h.hexdigest()


def _run_one(run_spec, cache_dir):
    if cache_dir is not None:
        path = os.path.join(cache_dir, _cache_key(run_spec) + ".npz")
        if os.path.exists(path):
            data = np.load(path)
            return data["values"], data["norms"]
    trace = propagate_electron(run_spec, keep_final_state=False)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            np.savez(fh, values=trace.values, norms=trace.norm_trace)
        os.replace(tmp, path)
    return trace.values, trace.norm_trace


def sweep(model, grid, initial, field, mode, sampling, absorber_width=0.0,
          potential=None, workers=1, cache_dir=None, light_log_derivative=None):
    """One electron propagation per sampled q; rows merged in q order.

    The per-point coupling is beta_q = mode.beta * q_m.  Identical inputs
    give bit-identical surfaces regardless of worker count.
    """
    specs = [
        ElectronRunSpec(
            grid=grid,
            initial=initial,
            field=field,
            mode=mode,
            beta_q=mode.beta * qm,
            model=model,
            potential=potential,
            absorber_width=absorber_width,
            light_log_derivative=light_log_derivative,
        )
        for qm in sampling.q_values
    ]

    results = [None] * len(specs)
    if workers <= 1:
        for m, rs in enumerate(specs):
            try:
                results[m] = _run_one(rs, cache_dir)
            except Exception as exc:
                raise NumericalError(f"sweep failed at q={sampling.q_values[m]:.4f}: {exc}") from exc
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, rs, cache_dir) for rs in specs]
            for m, fut in enumerate(futures):
                try:
                    results[m] = fut.result()
                except Exception as exc:
                    raise NumericalError(
                        f"sweep failed at q={sampling.q_values[m]:.4f}: {exc}"
                    ) from exc

    traces = np.vstack([r[0] for r in results])
    norms = np.vstack([r[1] for r in results])
    return DipoleSurface(q_values=sampling.q_values.copy(), traces=traces, dt=field.dt, norms=norms)


def _scaled_cheb_lsq(xs, ys, order, cond_limit=1e12):
    """Least-squares polynomial through a Chebyshev basis on scaled abscissae.

    ys may be (n,) or (n, m); returns ascending power coefficients in the
    ORIGINAL variable, shape (order+1,) or (order+1, m), plus rms residuals.
    """
    xs = np.asarray(xs, dtype=float)
    mid = 0.5 * (xs.max() + xs.min())
    half = 0.5 * (xs.max() - xs.min())
    if half == 0:
        raise ParameterError("need at least two distinct abscissae")
    t = (xs - mid) / half
    v = cheb.chebvander(t, order)
    if np.linalg.cond(v) > cond_limit:
        raise FitError(
            f"fit Vandermonde condition number exceeds {cond_limit:.0e}; rescale the sampling"
        )
    sol, _, _, _ = np.linalg.lstsq(v, ys, rcond=None)
    resid = v @ sol - ys
    rms = np.sqrt(np.mean(np.abs(resid) ** 2, axis=0))

    # chebyshev in t -> power series in t -> power series in x
    p_t = np.empty_like(sol)
    if sol.ndim == 1:
        p_t = cheb.cheb2poly(sol)
    else:
        for j in range(sol.shape[1]):
            p_t[: order + 1, j] = cheb.cheb2poly(np.ascontiguousarray(sol[:, j]))
    # substitute t = (x - mid)/half via binomial expansion
    transform = np.zeros((order + 1, order + 1))
    from math import comb

    for j in range(order + 1):  # t^j -> sum_k binom(j,k) (x/half)^k (-mid/half)^(j-k)
        for k in range(j + 1):
            transform[k, j] = comb(j, k) * ((-mid) ** (j - k)) / half**j
    p_x = transform @ p_t
    return p_x, rms


def fit_series(surface, beta, order):
    """Power series of the surface in u = beta*q at every time sample."""
    n_q = surface.q_values.size
    if n_q < order + 2:
        raise ParameterError(f"need >= order+2 = {order + 2} q samples, have {n_q}")
    if beta <= 0:
        raise ParameterError("beta must be positive to define the series variable")
    u = beta * surface.q_values
    coeffs, rms = _scaled_cheb_lsq(u, surface.traces, order)
    return SeriesCoefficients(
        order=order,
        f_k=coeffs,
        dt=surface.dt,
        u_range=(float(u.min()), float(u.max())),
        residual=rms,
    )


def resonant_dipole(data, mode, t_int):
    """Cosine quadrature d_Omega = (2/t_int) * int_0^t_int <x> cos(Omega t) dt.

    `data` is a DipoleSurface (profile over q) or a single DipoleTrace
    (one-point profile).  t_int should span an integer number of mode
    periods; otherwise a leakage warning is emitted.
    """
    if hasattr(data, "traces"):
        traces = data.traces
        q_values = data.q_values
        dt = data.dt
    else:
        traces = data.values[None, :]
        q_values = np.array([data.beta_q / mode.beta if mode.beta > 0 else 0.0])
        dt = data.dt

    n_have = traces.shape[1]
    n_int = int(round(t_int / dt))
    if abs(n_int * dt - t_int) > 0.5 * dt or n_int < 2 or n_int > n_have - 1:
        raise ParameterError(
            f"t_int={t_int} does not fit the trace (dt={dt}, duration={(n_have - 1) * dt})"
        )
    periods = t_int * mode.omega / (2.0 * np.pi)
    if abs(periods - round(periods)) > 1e-6 * max(1.0, periods):
        leak = abs(periods - round(periods)) / max(periods, 1.0)
        warnings.warn(
            f"t_int covers {periods:.6f} mode periods (non-integer); "
            f"spectral leakage of order {leak:.2e} expected",
            stacklevel=2,
        )
    t = np.arange(n_int + 1) * dt
    kernel = np.cos(mode.omega * t)
    seg = traces[:, : n_int + 1]
    d = (2.0 / t_int) * np.trapezoid(seg * kernel[None, :], dx=dt, axis=1)
    return ResonantProfile(q_values=q_values.copy(), d_omega=d)


def fit_fomega(profile, order, kind="polynomial", flow_domain=None,
               max_residual_frac=1e-3):
    """Polynomial fit f_Omega(q) of the resonant profile.

    The fitted polynomial must not vanish anywhere on flow_domain (defaults
    to the sampled q range): a zero makes the flow antiderivative diverge.
    """
    if kind == "rational":
        raise NotImplementedError("rational fits are not implemented; use polynomial")
    if kind != "polynomial":
        raise ParameterError(f"unknown fit kind {kind!r}")
    q = profile.q_values
    d = profile.d_omega
    if q.size < order + 2:
        raise ParameterError(f"need >= order+2 = {order + 2} samples, have {q.size}")
    coeffs, rms = _scaled_cheb_lsq(q, d, order)
    scale = np.abs(d).max()
    if scale > 0 and rms > max_residual_frac * scale:
        raise FitError(
            f"fit residual {rms:.3e} above {max_residual_frac:.1e} * max|d| = "
            f"{max_residual_frac * scale:.3e}; raise the order or loosen max_residual_frac"
        )
    domain = flow_domain if flow_domain is not None else (float(q.min()), float(q.max()))
    fine = np.linspace(domain[0], domain[1], 4001)
    vals = np.polynomial.polynomial.polyval(fine, coeffs)
    if np.any(vals == 0.0) or np.any(np.sign(vals[:-1]) != np.sign(vals[1:])):
        idx = int(np.argmin(np.abs(vals)))
        raise SingularFlowError(
            f"fitted f_Omega crosses zero near q={fine[idx]:.4f}; flow map undefined there"
        )
    return dataclasses.replace(
        profile,
        fit_coefficients=coeffs,
        fit_kind=kind,
        residual=float(rms),
        domain=domain,
    )


def export_surface(surface, csv_path, json_path=None, extra_meta=None):
    """CSV with one row per q sample plus a JSON sidecar."""
    n_q, n_t = surface.traces.shape
    with open(csv_path, "w") as fh:
        fh.write("q_au," + ",".join(f"t{n}" for n in range(n_t)) + "\n")
        for m in range(n_q):
            row = ",".join(repr(v) for v in surface.traces[m])
            fh.write(f"{surface.q_values[m]!r},{row}\n")
    if json_path is not None:
        meta = {"dt_au": surface.dt, "n_q": n_q, "n_t": n_t,
                "q_min_au": float(surface.q_values.min()),
                "q_max_au": float(surface.q_values.max())}
        if extra_meta:
            meta.update(extra_meta)
        with open(json_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def export_profile(profile, csv_path, json_path=None, extra_meta=None):
    with open(csv_path, "w") as fh:
        fh.write("q_au,d_omega_au\n")
        for qv, dv in zip(profile.q_values, profile.d_omega):
            fh.write(f"{qv!r},{dv!r}\n")
    if json_path is not None:
        meta = {
            "fit_kind": profile.fit_kind,
            "fit_coefficients": None
            if profile.fit_coefficients is None
            else [float(c) for c in profile.fit_coefficients],
            "residual_rms": profile.residual,
            "domain": None if profile.domain is None else list(profile.domain),
        }
        if extra_meta:
            meta.update(extra_meta)
        with open(json_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
