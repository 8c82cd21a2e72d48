"""Laboratory parameters, caesium constants, and scaled kicked-rotor units.

All angular frequencies are stored in rad/s internally; MHz and us appear
only at the config boundary.  Every function here is pure.

Scaled-unit dictionary (two-photon-recoil momentum units):
    kbar  = 8 * omega_r * T          effective Planck constant
    kappa = Omega_eff * omega_r * T * tau_p   classical stochasticity parameter
    phi_d = kappa / kbar = Omega_eff * tau_p / 8   physical kicking strength
    alpha = tau_p / T                pulse fraction; square-pulse strength k = kappa/alpha
    momentum: rho / kbar = p / (2 hbar k_L)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

HBAR = 1.054571817e-34  # J s

# Caesium D2 defaults.  The lattice wavelength and mass fix omega_r; the
# excited-state hyperfine splittings fix the detunings of the 4->4 and 4->3
# lines relative to 4->5.
CS_WAVELENGTH = 852.35e-9        # m
CS_MASS = 2.207e-25              # kg
CS_OFFSET_54 = 2 * math.pi * 251.1e6   # rad/s, F'=5 - F'=4
CS_OFFSET_43 = 2 * math.pi * 201.3e6   # rad/s, F'=4 - F'=3
CS_LINE_STRENGTHS = (11.0 / 27.0, 7.0 / 36.0, 7.0 / 108.0)  # s45, s44, s43


def kbar_from_period(period, omega_r):
    """Effective Planck constant 8 * omega_r * T for pulse period T (s)."""
    if period <= 0.0 or omega_r <= 0.0:
        raise ValueError(f"period and omega_r must be positive, got {period}, {omega_r}")
    return 8.0 * omega_r * period


def omega_eff(rabi, detuning_45, offsets=(CS_OFFSET_54, CS_OFFSET_43),
              line_strengths=CS_LINE_STRENGTHS):
    """Effective potential strength of the three-line light shift.

    Omega^2 (s45/d45 + s44/d44 + s43/d43), with d44 = d45 + offset_54 and
    d43 = d44 + offset_43.  All inputs rad/s.
    """
    s45, s44, s43 = line_strengths
    d45 = detuning_45
    d44 = d45 + offsets[0]
    d43 = d44 + offsets[1]
    if d45 == 0.0 or d44 == 0.0 or d43 == 0.0:
        raise ValueError("zero detuning in omega_eff")
    return rabi**2 * (s45 / d45 + s44 / d44 + s43 / d43)


def phi_d_from(omega_eff_value, pulse_length):
    """Dimensionless kicking strength Omega_eff * tau_p / 8."""
    if omega_eff_value < 0.0 or pulse_length <= 0.0:
        raise ValueError("omega_eff must be >= 0 and pulse_length > 0")
    return omega_eff_value * pulse_length / 8.0


def momentum_to_experimental(rho, kbar):
    """Scaled momentum rho -> two-photon-recoil units, rho/kbar."""
    if kbar <= 0.0:
        raise ValueError(f"kbar must be positive, got {kbar}")
    return rho / kbar


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters of the pulsed standing wave on the caesium D2 line.

    rabi is the full Rabi frequency Omega (rad/s); half of it is the
    single-beam resonant Rabi frequency.
    """

    recoil_frequency: float          # omega_r, rad/s
    lattice_wavenumber: float        # k_L, 1/m
    atom_mass: float                 # kg
    pulse_length: float              # tau_p, s
    rabi: float                      # Omega, rad/s
    detuning_45: float               # rad/s
    offset_54: float = CS_OFFSET_54  # rad/s
    offset_43: float = CS_OFFSET_43  # rad/s
    line_strengths: tuple = CS_LINE_STRENGTHS

    def __post_init__(self):
        for name in ("recoil_frequency", "lattice_wavenumber", "atom_mass",
                     "pulse_length", "rabi"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        omega_r_check = HBAR * self.lattice_wavenumber**2 / (2.0 * self.atom_mass)
        if abs(omega_r_check - self.recoil_frequency) > 1e-6 * self.recoil_frequency:
            raise ValueError(
                "inconsistent constants: omega_r != hbar k_L^2 / 2m "
                f"({self.recoil_frequency} vs {omega_r_check})")

    @classmethod
    def caesium(cls, pulse_length=520e-9, rabi_quoted=2 * math.pi * 34e6,
                detuning_45=2 * math.pi * 315e6, quoted_is_half_rabi=True,
                wavelength=CS_WAVELENGTH, mass=CS_MASS,
                offset_54=CS_OFFSET_54, offset_43=CS_OFFSET_43):
        """Caesium defaults.

        Quoted Rabi frequencies in the 34-76 MHz range are ambiguous between
        Omega and Omega/2; quoted_is_half_rabi=True (default) reads them as
        Omega/2, which reproduces phi_d ~ 3.3 at detuning 2pi*315 MHz.
        """
        k_l = 2.0 * math.pi / wavelength
        omega_r = HBAR * k_l**2 / (2.0 * mass)
        rabi = 2.0 * rabi_quoted if quoted_is_half_rabi else rabi_quoted
        return cls(recoil_frequency=omega_r, lattice_wavenumber=k_l,
                   atom_mass=mass, pulse_length=pulse_length, rabi=rabi,
                   detuning_45=detuning_45, offset_54=offset_54,
                   offset_43=offset_43)

    def omega_eff(self):
        return omega_eff(self.rabi, self.detuning_45,
                         (self.offset_54, self.offset_43), self.line_strengths)

    def phi_d(self):
        return phi_d_from(self.omega_eff(), self.pulse_length)


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless kicked-rotor parameters for one pulse period."""

    kbar: float      # effective Planck constant
    kappa: float     # classical stochasticity parameter
    phi_d: float     # kappa / kbar
    alpha: float     # tau_p / T
    eta: float       # spontaneous-emission probability per kick
    period: float    # T, s

    def __post_init__(self):
        if self.kbar <= 0.0:
            raise ValueError("kbar must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError(f"eta must lie in [0, 1), got {self.eta}")
        if abs(self.kappa - self.phi_d * self.kbar) > 1e-9 * max(1.0, abs(self.kappa)):
            raise ValueError("kappa != phi_d * kbar")

    @classmethod
    def from_period(cls, phi_d, period, omega_r, pulse_length, eta=0.0):
        """Build scaled parameters from (phi_d, T) at fixed laser settings."""
        kbar = kbar_from_period(period, omega_r)
        return cls(kbar=kbar, kappa=phi_d * kbar, phi_d=phi_d,
                   alpha=pulse_length / period, eta=eta, period=period)

    @classmethod
    def from_physical(cls, phys: PhysicalParams, period, eta=0.0):
        return cls.from_period(phys.phi_d(), period, phys.recoil_frequency,
                               phys.pulse_length, eta=eta)

    @property
    def square_strength(self):
        """Square-pulse kick strength k = kappa / alpha."""
        return self.kappa / self.alpha


def caesium_omega_r(wavelength=CS_WAVELENGTH, mass=CS_MASS):
    """Recoil frequency hbar k_L^2 / 2m for the default lattice."""
    k_l = 2.0 * math.pi / wavelength
    return HBAR * k_l**2 / (2.0 * mass)
