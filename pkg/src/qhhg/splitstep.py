"""Shared split-operator machinery for 1D spectral propagation.

Both the real-time electron propagator and the imaginary-time eigensolver
build on these helpers: a momentum grid, kinetic phase factors, and a
single Strang step  exp(-z V/2) F^-1 exp(-z T) F exp(-z V/2).
"""

import numpy as np
from scipy.fft import fft, ifft


def momentum_grid(n_points, dx):
    """FFT-ordered momentum samples for an n-point grid of spacing dx."""
    return 2.0 * np.pi * np.fft.fftfreq(n_points, d=dx)


def kinetic_energies(n_points, dx):
    return 0.5 * momentum_grid(n_points, dx) ** 2


def strang_step(psi, exp_v_half, exp_t):
    """One Strang step with precomputed half-potential and kinetic factors.

    Mutates its input buffers and returns the stepped array.  The factors
    may encode real or imaginary time; unitarity is the caller's concern.
    """
    psi *= exp_v_half
    psi_k = fft(psi, overwrite_x=True)
    psi_k *= exp_t
    psi = ifft(psi_k, overwrite_x=True)
    psi *= exp_v_half
    return psi


def energy_expectation(psi, potential, kinetic):
    """<H> = <T> + <V>, normalized by <psi|psi> (dx cancels via Parseval)."""
    density = np.abs(psi) ** 2
    e_pot = float(np.dot(density, potential)) / density.sum()
    dens_k = np.abs(fft(psi)) ** 2
    e_kin = float(np.dot(dens_k, kinetic)) / dens_k.sum()
    return e_kin + e_pot


def apply_hamiltonian(psi, potential, kinetic):
    """H psi with spectral kinetic energy."""
    return ifft(kinetic * fft(psi)) + potential * psi
