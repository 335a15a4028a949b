"""Atomic-unit constants and laboratory-unit conversions.

Internally everything is in Hartree atomic units (hbar = e = m_e = 1).
"""

import math

# speed of light in atomic units
C_AU = 137.035999

# 1 atomic unit of intensity in W/cm^2 (Iau = c E0^2 / 8 pi with E0 = 1 a.u.)
INTENSITY_AU = 3.50945e16

# 1 Hartree in eV
HARTREE_EV = 27.211386245988

# 1 nm in Bohr radii
NM_TO_BOHR = 1.0 / 0.0529177210903


def ev_to_au(energy_ev):
    return energy_ev / HARTREE_EV


def au_to_ev(energy_au):
    return energy_au * HARTREE_EV


def wavelength_nm_to_omega(wavelength_nm):
    """Angular frequency (a.u.) of light with the given vacuum wavelength."""
    if wavelength_nm <= 0:
        raise ValueError("wavelength must be positive")
    return 2.0 * math.pi * C_AU / (wavelength_nm * NM_TO_BOHR)


def intensity_to_field(intensity_w_cm2):
    """Peak force amplitude (a.u.) for the given intensity in W/cm^2."""
    if intensity_w_cm2 <= 0:
        raise ValueError("intensity must be positive")
    return math.sqrt(intensity_w_cm2 / INTENSITY_AU)
