"""Classical standard-map ensemble: the baseline the quantum rotor departs from.

One delta kick maps (phi, rho) -> (phi', rho') with

    rho' = rho + kappa sin(phi)
    phi' = (phi + rho') mod 2 pi

in scaled units.  The ensemble runner works in experimental momentum units
P = rho/kbar (so P' = P + phi_d sin(phi), phi' = phi + kbar P'), matching
the quantum cloud's Gaussian width sigma, and reports E'(n) = <P^2>/2.

Accelerator-mode windows |kappa - 2 pi j| < 0.3 are excluded from the
formula-agreement property assertions; near those kappa the map's sticky
islands make diffusion anomalous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ACCELERATOR_WINDOW = 0.3


@dataclass
class ClassicalParticle:
    """Phase-space point of the standard map, phi wrapped to [0, 2 pi)."""

    phi: float
    rho: float

    def __post_init__(self):
        self.phi = self.phi % (2.0 * math.pi)


def standard_map_step(particle: ClassicalParticle, kappa) -> ClassicalParticle:
    """One kick of the standard map in scaled units."""
    rho = particle.rho + kappa * math.sin(particle.phi)
    phi = (particle.phi + rho) % (2.0 * math.pi)
    return ClassicalParticle(phi=phi, rho=rho)


def in_accelerator_window(kappa, radius=ACCELERATOR_WINDOW):
    """Whether kappa sits within `radius` of an accelerator value 2 pi j."""
    j = round(kappa / (2.0 * math.pi))
    return j >= 1 and abs(kappa - 2.0 * math.pi * j) < radius


@dataclass
class ClassicalEnsembleResult:
    energy_mean: np.ndarray     # E'(0..N), experimental units
    energy_stderr: np.ndarray
    rates: np.ndarray
    particles: int


def run_classical_ensemble(phi_d, period, omega_r, kicks, count, sigma,
                           eta=0.0, recoil_model="uniform", seed=0,
                           phi_sampler=None) -> ClassicalEnsembleResult:
    """Kick a cloud of classical particles and record its energy growth.

    Initial momenta are Gaussian of width sigma (experimental units, the
    same cloud as the quantum ensemble) with uniform random phases; the
    stochasticity parameter is kappa = 8 omega_r T phi_d.  With eta > 0 a
    per-kick recoil lottery mirrors the quantum recoil-shift jump.  Results
    are deterministic in the seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    kbar = 8.0 * omega_r * period
    if phi_sampler is not None:
        phi_ds = np.array([phi_sampler(rng) for _ in range(count)])
    else:
        phi_ds = np.full(count, float(phi_d))
    momentum = rng.normal(0.0, sigma, count)
    phase = rng.uniform(0.0, 2.0 * math.pi, count)

    energies = np.empty((kicks + 1, count))
    energies[0] = 0.5 * momentum**2
    for n in range(kicks):
        momentum = momentum + phi_ds * np.sin(phase)
        if eta > 0.0:
            hit = rng.random(count) < eta
            if np.any(hit):
                k = int(hit.sum())
                sign = np.where(rng.random(k) < 0.5, 1.0, -1.0)
                if recoil_model == "uniform":
                    u = rng.uniform(-1.0, 1.0, k)
                else:  # dipole-projected, by rejection
                    u = np.empty(k)
                    for i in range(k):
                        while True:
                            cand = rng.uniform(-1.0, 1.0)
                            if rng.random() < 0.5 * (1.0 + cand * cand):
                                u[i] = cand
                                break
                momentum[hit] = momentum[hit] + 0.5 * sign + 0.5 * u
        phase = np.mod(phase + kbar * momentum, 2.0 * math.pi)
        energies[n + 1] = 0.5 * momentum**2

    mean = energies.mean(axis=1)
    if count > 1:
        stderr = energies.std(axis=1, ddof=1) / math.sqrt(count)
    else:
        stderr = np.zeros_like(mean)
    return ClassicalEnsembleResult(energy_mean=mean, energy_stderr=stderr,
                                   rates=np.diff(mean), particles=count)
