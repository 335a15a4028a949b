"""Field-driven electron on the x-grid for one parametric quadrature value.

The electron sees the classical pulse plus the local mode force
(Omega/c) * beta_q * sin(Omega t); its position expectation versus time is
the dipole trace that couples back to the light mode.  Split-operator
Strang stepping with a spectral kinetic factor; optional cos^(1/8)
absorbing mask at the grid edges.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft, rfft, rfftfreq

from qhhg import _kernels as kernels
from qhhg import units
from qhhg.errors import NumericalError, ParameterError, ResolutionError
from qhhg.model import PotentialModel, SpatialGrid, build_potential
from qhhg.splitstep import kinetic_energies


@dataclass(frozen=True)
class ModeParams:
    """One quantized mode: frequency Omega, coupling beta.

    harmonic_order is bookkeeping only; use from_order to derive Omega
    from a laser frequency.
    """

    omega: float
    beta: float
    harmonic_order: int | None = None

    def __post_init__(self):
        if self.omega <= 0:
            raise ParameterError("mode frequency must be positive")
        if self.beta < 0:
            raise ParameterError("beta must be >= 0")

    @classmethod
    def from_order(cls, order, omega_l, beta):
        return cls(omega=order * omega_l, beta=beta, harmonic_order=order)

    @property
    def period(self):
        return 2.0 * np.pi / self.omega


def effective_force(mode, beta_q, t):
    """Local mode force (Omega/c) * beta_q * sin(Omega t)."""
    return (mode.omega / units.C_AU) * beta_q * np.sin(mode.omega * t)


@dataclass
class ElectronRunSpec:
    grid: SpatialGrid
    initial: "np.ndarray | object"
    field: object
    mode: ModeParams
    beta_q: float = 0.0
    model: PotentialModel | None = None
    potential: np.ndarray | None = None
    absorber_width: float = 0.0
    # optional symmetrized nonlocal correction: callable (beta_q, t) ->
    # Im[d_q phi / phi]; adds the force -(Omega/c)*beta*cos(Omega t)*Im(L)
    light_log_derivative: object = None

    def resolved_potential(self):
        if (self.model is None) == (self.potential is None):
            raise ParameterError("specify exactly one of model or potential")
        if self.potential is not None:
            return np.asarray(self.potential, dtype=float)
        return build_potential(self.model, self.grid)

    def initial_amplitudes(self):
        amps = getattr(self.initial, "amplitudes", self.initial)
        return np.asarray(amps, dtype=np.complex128)


@dataclass
class DipoleTrace:
    dt: float
    values: np.ndarray
    norm_trace: np.ndarray
    beta_q: float
    final_state: np.ndarray | None = None

    @property
    def times(self):
        return np.arange(self.values.shape[0]) * self.dt


def absorber_mask(grid, width):
    """cos^(1/8) absorbing mask over `width` at each edge (1 in the interior)."""
    mask = np.ones(grid.n_points)
    if width <= 0:
        return mask
    if width >= (grid.x_max - grid.x_min) / 4:
        raise ParameterError("absorber_width must be below a quarter of the box")
    x = grid.x
    left = x < grid.x_min + width
    right = x > grid.x_max - width
    mask[left] = np.cos(0.5 * np.pi * (grid.x_min + width - x[left]) / width) ** 0.125
    mask[right] = np.cos(0.5 * np.pi * (x[right] - (grid.x_max - width)) / width) ** 0.125
    return mask


def propagate_electron(spec, keep_final_state=True):
    """Propagate the driven electron; record <x>(t) and the norm each step.

    The trace has one sample per field sample (the initial point included).
    Without an absorber the norm is conserved at the 1e-8 level; NaNs abort
    with the offending step index.
    """
    grid = spec.grid
    dx = grid.dx
    x = grid.x
    potential = spec.resolved_potential()
    psi = spec.initial_amplitudes().copy()

    nrm0 = np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    if abs(nrm0 - 1.0) > 1e-6:
        raise ParameterError(f"initial state norm {nrm0:.8f} != 1")

    field = spec.field
    dt = field.dt
    kinetic = kinetic_energies(grid.n_points, dx)
    p_max2 = 2.0 * kinetic.max()
    if dt * np.abs(potential).max() >= 0.5 or dt * 0.5 * p_max2 >= 0.5:
        raise ResolutionError(
            f"dt={dt:.3g} violates the split-step guard "
            f"(dt*|V|max={dt * np.abs(potential).max():.3g}, dt*pmax^2/2={dt * 0.5 * p_max2:.3g})"
        )

    exp_t = np.exp(-1j * dt * kinetic)
    mask = absorber_mask(grid, spec.absorber_width)
    use_mask = spec.absorber_width > 0
    mode = spec.mode
    omega_over_c = mode.omega / units.C_AU

    n_steps = field.values.shape[0] - 1
    dip = np.empty(n_steps + 1)
    norms = np.empty(n_steps + 1)
    d0, n0 = kernels.dipole_norm(psi, x, dx)
    dip[0], norms[0] = d0, n0

    f_values = field.values
    for n in range(n_steps):
        t_mid = (n + 0.5) * dt
        f_mid = 0.5 * (f_values[n] + f_values[n + 1])
        f_tot = f_mid + omega_over_c * spec.beta_q * np.sin(mode.omega * t_mid)
        if spec.light_log_derivative is not None:
            im_l = float(np.imag(spec.light_log_derivative(spec.beta_q, t_mid)))
            f_tot -= omega_over_c * mode.beta * np.cos(mode.omega * t_mid) * im_l
        phase_half = np.exp((-0.5j * dt) * (potential + f_tot * x))
        kernels.apply_phase(psi, phase_half)
        psi_k = fft(psi, overwrite_x=True)
        kernels.apply_phase(psi_k, exp_t)
        psi = ifft(psi_k, overwrite_x=True)
        if use_mask:
            kernels.apply_phase_mask(psi, phase_half, mask)
        else:
            kernels.apply_phase(psi, phase_half)
        d, nn = kernels.dipole_norm(psi, x, dx)
        dip[n + 1], norms[n + 1] = d, nn
        if not np.isfinite(nn):
            raise NumericalError(f"NaN encountered at step {n + 1}")
        if nn < 0.25:
            raise NumericalError(
                f"norm dropped to {nn:.3f} at step {n + 1}; grid or absorber too small"
            )

    return DipoleTrace(
        dt=dt,
        values=dip,
        norm_trace=norms,
        beta_q=spec.beta_q,
        final_state=psi if keep_final_state else None,
    )


_WINDOWS = {
    "rect": lambda n: np.ones(n),
    "hann": lambda n: np.hanning(n),
    "blackman": lambda n: np.blackman(n),
}


def dipole_spectrum(trace, omega_l, window="hann"):
    """Windowed spectrum of <x>(t); returns (harmonic orders, complex amps).

    The amplitude normalization makes a pure cos(k*omega_l*t) input over an
    integer number of cycles come out with |amp| = 1 at order k (rect
    window).
    """
    if window not in _WINDOWS:
        raise ParameterError(f"window must be one of {sorted(_WINDOWS)}")
    n = trace.values.shape[0]
    if n * trace.dt < 2.0 * (2.0 * np.pi / omega_l):
        raise ResolutionError("trace shorter than 2 laser cycles")
    w = _WINDOWS[window](n)
    spec = rfft(w * trace.values) * (2.0 / w.sum())
    orders = rfftfreq(n, trace.dt) * 2.0 * np.pi / omega_l
    return orders, spec


def export_trace_csv(trace, path):
    with open(path, "w") as fh:
        fh.write("t_au,x_au,norm\n")
        for t, v, nn in zip(trace.times, trace.values, trace.norm_trace):
            fh.write(f"{t!r},{v!r},{nn!r}\n")
