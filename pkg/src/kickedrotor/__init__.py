"""Atom-optics quantum kicked rotor with spontaneous-emission decoherence.

Simulation and analysis toolkit: scaled-unit conversions, Shepelyansky
diffusion-rate formulas, Monte Carlo wavefunction trajectories on a
quasimomentum ladder, the classical standard-map baseline, kick-strength
spread over the atom cloud, and a pulse-period sweep CLI.
"""

__version__ = "0.1.0"

from .analytic import (RateSequence, bessel_j, dcl_experimental, dq_experimental,
                       dq_initial, energy_after, kq_scaled, late_time_rate)
from .beam import BeamGeometry, ZeemanWeights, averaged_rate, phi_d_radial, sample_phi_d
from .csim import ClassicalParticle, run_classical_ensemble, standard_map_step
from .qsim import (LatticeState, SimConfig, TruncationError, apply_free, apply_kick,
                   apply_square_pulse, init_trajectory, run_ensemble, run_trajectory,
                   spontaneous_jump)
from .units import PhysicalParams, ScaledParams, kbar_from_period, momentum_to_experimental
from .units import omega_eff, phi_d_from
