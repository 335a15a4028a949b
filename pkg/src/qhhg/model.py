"""1D model systems: soft-core potentials and electronic eigenstates.

Potentials follow the community-standard soft-core form
V(x) = -sum_k Z_k / sqrt((x - x_k)^2 + a); the softening a is calibrated
so that the ground-state binding energy matches a target ionization
potential.  Eigenstates come from imaginary-time propagation with
Gram-Schmidt deflation, polished by a small Lanczos diagonalization so the
residual ||H psi - E psi|| reaches the 1e-6 contract.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import fft, ifft

from qhhg import units
from qhhg.errors import NumericalError, ParameterError, ShapeError, SupportError
from qhhg.splitstep import (
    apply_hamiltonian,
    energy_expectation,
    kinetic_energies,
    strang_step,
)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform x-grid; n_points must be a power of two for the FFT steps."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2 or (self.n_points & (self.n_points - 1)) != 0:
            raise ParameterError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if self.x_max <= self.x_min:
            raise ParameterError("x_max must exceed x_min")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class PotentialModel:
    """Soft-core atom or fixed-geometry two-center molecule.

    core_charges: list of (charge, position) pairs in a.u.
    softening: the squared-length parameter a in 1/sqrt(dx^2 + a).
    target_ip_ev: optional calibration target for the binding energy.
    """

    kind: str
    core_charges: tuple = ((1.0, 0.0),)
    softening: float = 2.0
    target_ip_ev: float | None = None

    def __post_init__(self):
        if self.kind not in ("soft_core_atom", "two_center_molecule"):
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        if self.softening <= 0:
            raise ParameterError("softening must be positive")
        if self.kind == "two_center_molecule" and len(self.core_charges) != 2:
            raise ParameterError("two_center_molecule requires exactly two centers")
        if self.kind == "soft_core_atom" and len(self.core_charges) < 1:
            raise ParameterError("need at least one core charge")


@dataclass
class ElectronicState:
    grid: SpatialGrid
    amplitudes: np.ndarray
    energy: float | None = None
    label: str = ""

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx))


# Presets used by the bundled recipes.  Softening values are frozen results
# of calibrate_softening against the quoted ionization potentials; the
# test suite re-checks them to 1e-4 a.u.
PRESETS = {
    "h_like": PotentialModel(
        kind="soft_core_atom",
        core_charges=((1.0, 0.0),),
        softening=2.0,
        target_ip_ev=units.HARTREE_EV * 0.5,
    ),
    "ca_like": PotentialModel(
        kind="soft_core_atom",
        core_charges=((1.0, 0.0),),
        softening=12.4470321655,
        target_ip_ev=6.11,
    ),
    "cao_like": PotentialModel(
        kind="two_center_molecule",
        core_charges=((1.0, -1.7), (0.5, 1.7)),
        softening=26.0097171783,
        target_ip_ev=6.6,
    ),
}


def preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown model preset {name!r}") from None


def build_potential(model, grid):
    """Sample V(x) on the grid."""
    if model.softening <= 0:
        raise ParameterError("softening must be positive")
    x = grid.x
    v = np.zeros_like(x)
    for charge, position in model.core_charges:
        v -= charge / np.sqrt((x - position) ** 2 + model.softening)
    return v


def _imaginary_time_state(potential, kinetic, dx, seed, lower_states, tau_schedule, tol_energy, max_steps):
    """Ground state of H restricted to the orthogonal complement of lower_states."""
    psi = seed.astype(np.complex128)

    def deflate(p):
        for phi in lower_states:
            p -= phi * (np.vdot(phi, p) * dx)
        return p

    psi = deflate(psi)
    nrm = np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    if nrm < 1e-12:
        raise NumericalError("imaginary-time seed collapsed under deflation")
    psi /= nrm

    steps_used = 0
    energy = energy_expectation(psi, potential, kinetic)
    for tau in tau_schedule:
        exp_v_half = np.exp(-0.5 * tau * potential)
        exp_t = np.exp(-tau * kinetic)
        while True:
            psi = strang_step(psi, exp_v_half, exp_t)
            psi = deflate(psi)
            psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
            steps_used += 1
            if steps_used % 8 == 0 or steps_used < 8:
                new_energy = energy_expectation(psi, potential, kinetic)
                if abs(new_energy - energy) < tol_energy * 8:
                    energy = new_energy
                    break
                energy = new_energy
            if steps_used > max_steps:
                res = residual_norm(psi, energy, potential, kinetic, dx)
                raise NumericalError(
                    f"imaginary-time propagation did not converge in {max_steps} steps "
                    f"(last energy {energy:.10f}, residual {res:.2e})"
                )
    return psi, energy


def _lanczos_polish(psi, potential, kinetic, dx, lower_states, target_residual=3e-7,
                    max_krylov=160, check_every=16):
    """Rayleigh-Ritz refinement in a growing Krylov space around psi.

    Works in the complement of lower_states so deflated excited states stay
    orthogonal to the states found before them; the space grows until the
    lowest Ritz vector's residual drops below target_residual.
    """

    def project(p):
        for phi in lower_states:
            p = p - phi * (np.vdot(phi, p) * dx)
        return p

    def ritz_lowest(basis, h_basis):
        m = len(basis)
        h = np.empty((m, m), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                h[i, j] = np.vdot(basis[i], h_basis[j]) * dx
        evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
        vec = sum(evecs[k, 0] * basis[k] for k in range(m))
        vec /= np.sqrt(np.sum(np.abs(vec) ** 2) * dx)
        return vec, float(evals[0])

    basis, h_basis = [], []
    v = project(psi.copy())
    v /= np.sqrt(np.sum(np.abs(v) ** 2) * dx)
    best = (v, energy_expectation(v, potential, kinetic))
    while len(basis) < max_krylov:
        basis.append(v)
        hv = apply_hamiltonian(v, potential, kinetic)
        h_basis.append(hv)
        w = project(hv.copy())
        for _ in range(2):  # two passes keep the basis orthogonal
            for b in basis:
                w -= b * (np.vdot(b, w) * dx)
        nrm = np.sqrt(np.sum(np.abs(w) ** 2) * dx)
        if nrm < 1e-13:
            break
        v = w / nrm
        if len(basis) % check_every == 0:
            best = ritz_lowest(basis, h_basis)
            if residual_norm(best[0], best[1], potential, kinetic, dx) < target_residual:
                return best
    return ritz_lowest(basis, h_basis)


def residual_norm(psi, energy, potential, kinetic, dx):
    r = apply_hamiltonian(psi, potential, kinetic) - energy * psi
    return float(np.sqrt(np.sum(np.abs(r) ** 2) * dx))


def eigensolve(model, grid, n_states, **kwargs):
    """Lowest n_states eigenstates of the model Hamiltonian on the grid."""
    width = max(1.0, np.sqrt(model.softening))
    return eigensolve_potential(build_potential(model, grid), grid, n_states,
                                seed_width=width, **kwargs)


def eigensolve_potential(potential, grid, n_states, tol_energy=1e-10,
                         max_steps=200_000, boundary_tol=1e-8,
                         residual_tol=1e-6, seed_width=1.0):
    """Lowest n_states eigenstates of -1/2 d^2/dx^2 + V on the grid.

    Imaginary-time propagation with Gram-Schmidt deflation provides the
    states; a short Lanczos pass sharpens each one.  States come back
    orthonormal with ascending energies.
    """
    if n_states < 1:
        raise ParameterError("n_states must be >= 1")
    kinetic = kinetic_energies(grid.n_points, grid.dx)
    dx = grid.dx
    x = grid.x

    width = seed_width
    tau_schedule = (0.5, 0.1, 0.02)

    states = []
    lower = []
    for n in range(n_states):
        seed = (x ** n) * np.exp(-(x / (2.0 * width)) ** 2)
        seed = seed + 0.01 * np.exp(-((x - 0.37 * width) / width) ** 2)  # break accidental parity
        psi, energy = _imaginary_time_state(
            potential, kinetic, dx, seed, lower, tau_schedule, tol_energy, max_steps
        )
        psi, energy = _lanczos_polish(psi, potential, kinetic, dx, lower)
        res = residual_norm(psi, energy, potential, kinetic, dx)
        if res > residual_tol:
            raise NumericalError(
                f"state {n}: residual {res:.3e} above {residual_tol:.1e} after polish"
            )
        edge = max(abs(psi[0]), abs(psi[-1]))
        if edge > boundary_tol:
            raise SupportError(
                f"state {n} does not decay at the grid boundary (|psi|={edge:.2e}); widen the grid"
            )
        # fix the arbitrary global phase: make the largest-|psi| sample real positive
        k = int(np.argmax(np.abs(psi)))
        psi = psi * np.exp(-1j * np.angle(psi[k]))
        lower.append(psi)
        states.append(ElectronicState(grid=grid, amplitudes=psi, energy=energy, label=f"state{n}"))

    order = np.argsort([s.energy for s in states])
    states = [states[i] for i in order]
    for n, s in enumerate(states):
        s.label = f"state{n}"
    return states


def make_superposition(states, coefficients):
    """Normalized linear combination of states on a common grid."""
    if len(states) != len(coefficients) or not states:
        raise ShapeError("need one coefficient per state")
    coeffs = np.asarray(coefficients, dtype=np.complex128)
    if np.all(np.abs(coeffs) == 0):
        raise ParameterError("coefficient vector must be nonzero")
    grid = states[0].grid
    for s in states[1:]:
        if s.grid != grid:
            raise ShapeError("states live on different grids")
    amps = np.zeros(grid.n_points, dtype=np.complex128)
    for c, s in zip(coeffs, states):
        amps += c * s.amplitudes
    amps /= np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dx)
    return ElectronicState(grid=grid, amplitudes=amps, label="superposition")


def calibrate_softening(model, grid, target_ip_au, a_lo=0.05, a_hi=80.0, tol=1e-5):
    """Bisect the softening parameter until E0 = -target_ip_au.

    E0 is monotone increasing in the softening, which makes bisection safe.
    Returns the calibrated PotentialModel.
    """
    from dataclasses import replace

    def ground_energy(a):
        m = replace(model, softening=a)
        return eigensolve(m, grid, 1, boundary_tol=1e-5)[0].energy

    target = -abs(target_ip_au)
    e_lo = ground_energy(a_lo)
    e_hi = ground_energy(a_hi)
    if not (e_lo <= target <= e_hi):
        raise ParameterError(
            f"target energy {target:.5f} not bracketed by softening range "
            f"[{a_lo}, {a_hi}] -> [{e_lo:.5f}, {e_hi:.5f}]"
        )
    lo, hi = a_lo, a_hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        e_mid = ground_energy(mid)
        if abs(e_mid - target) < tol:
            lo = hi = mid
            break
        if e_mid < target:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    return replace(model, softening=a, target_ip_ev=units.au_to_ev(abs(target_ip_au)))


def export_potential_csv(model, grid, path):
    """Two-column CSV (x, V) of the sampled potential."""
    v = build_potential(model, grid)
    x = grid.x
    with open(path, "w") as fh:
        fh.write("x_au,V_au\n")
        for xi, vi in zip(x, v):
            fh.write(f"{xi!r},{vi!r}\n")
