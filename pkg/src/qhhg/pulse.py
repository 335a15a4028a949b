"""Classical driving pulse: laboratory-unit parameters to a sampled force.

F(t) is the length-gauge force of the driving laser in atomic units; the
sin^2 envelope switches on and off smoothly and carries no DC component,
so the vector potential returns to zero after the pulse.
"""

import math
from dataclasses import dataclass

import numpy as np

from qhhg import units
from qhhg.errors import ParameterError, ResolutionError

ENVELOPES = ("sin_squared", "trapezoid", "flat")


@dataclass(frozen=True)
class PulseParams:
    wavelength_nm: float
    intensity_w_cm2: float
    n_cycles: int
    envelope: str = "sin_squared"
    cep: float = 0.0

    def __post_init__(self):
        if self.wavelength_nm <= 0 or self.intensity_w_cm2 <= 0:
            raise ParameterError("wavelength and intensity must be positive")
        if self.n_cycles < 1:
            raise ParameterError("n_cycles must be >= 1")
        if self.envelope not in ENVELOPES:
            raise ParameterError(f"envelope must be one of {ENVELOPES}")


@dataclass(frozen=True)
class SampledField:
    """Force samples F(t_n) at t_n = n*dt, n = 0..N (endpoints included)."""

    dt: float
    values: np.ndarray
    t_total: float
    omega_l: float = 0.0
    f0: float = 0.0

    @property
    def times(self):
        return np.arange(self.values.shape[0]) * self.dt


def to_atomic_units(p):
    """(omega_L, F0) in a.u. for the given pulse parameters."""
    return units.wavelength_nm_to_omega(p.wavelength_nm), units.intensity_to_field(p.intensity_w_cm2)


def envelope_profile(p, t, t_pulse):
    if p.envelope == "flat":
        return np.where((t >= 0) & (t <= t_pulse), 1.0, 0.0)
    if p.envelope == "sin_squared":
        inside = (t >= 0) & (t <= t_pulse)
        return np.where(inside, np.sin(np.pi * np.clip(t, 0, t_pulse) / t_pulse) ** 2, 0.0)
    # trapezoid: one-cycle linear ramps (quarter-pulse ramps for short pulses)
    ramp = min(1.0, p.n_cycles / 4.0) * (t_pulse / p.n_cycles)
    up = np.clip(t / ramp, 0.0, 1.0)
    down = np.clip((t_pulse - t) / ramp, 0.0, 1.0)
    return np.where((t >= 0) & (t <= t_pulse), np.minimum(up, down), 0.0)


def sample_pulse(p, dt, tail=0.0):
    """Sample the pulse force on a uniform time grid of spacing dt.

    tail: extra field-free time appended after the pulse (the emitted mode
    keeps accumulating phase there, so traces often need it).
    """
    omega_l, f0 = to_atomic_units(p)
    t_cycle = 2.0 * math.pi / omega_l
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if dt > t_cycle / 40.0:
        raise ResolutionError(
            f"dt={dt:.4g} too coarse for the carrier (need < T_cycle/40 = {t_cycle / 40:.4g})"
        )
    t_pulse = p.n_cycles * t_cycle
    n_steps = int(round((t_pulse + tail) / dt))
    t = np.arange(n_steps + 1) * dt
    field = f0 * envelope_profile(p, t, t_pulse) * np.sin(omega_l * t + p.cep)
    field[t > t_pulse] = 0.0
    return SampledField(dt=dt, values=field, t_total=n_steps * dt, omega_l=omega_l, f0=f0)


def export_field_csv(field, path):
    with open(path, "w") as fh:
        fh.write("t_au,F_au\n")
        for ti, fi in zip(field.times, field.values):
            fh.write(f"{ti!r},{fi!r}\n")
