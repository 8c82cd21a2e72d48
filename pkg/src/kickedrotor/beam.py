"""Spread of kicking strengths across the atom cloud.

The standing wave has a radial Gaussian intensity profile, so an atom at
transverse radius r sees

    phi_d(r) = phi_d_max * exp(-r^2 / (2 sigma_beam^2)),

and the 2-D radial Gaussian cloud (width sigma_cloud, truncated at
cloud_cutoff * sigma_cloud) samples a distribution of kick strengths.
The default geometry is calibrated so that the cloud average reproduces
the published pair mean = 0.77 phi_d_max with a standard deviation of 18%
of the mean; a pure untruncated 2:1 beam-to-cloud geometry can reproduce
the 0.77 mean but pins the relative spread at 23%, so the beam width and
cutoff are fit to both numbers and that calibration is itself under test.

A second, smaller spread comes from the magnetic substates of the F=4
ground level coupling to the excited hyperfine levels with different
pi-transition strengths; with equal substate populations this adds up to
a few percent depending on detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .units import CS_OFFSET_43, CS_OFFSET_54

# Calibrated defaults: sigma_cloud^2/sigma_beam^2 and the cloud cutoff (in
# sigma_cloud units) solving mean = 0.77 phi_max, std = 0.18 * mean.
CAL_WIDTH_RATIO_SQ = 0.696993517894
CAL_CLOUD_CUTOFF = 1.374936965111
CLOUD_SIGMA = 270e-6  # m


@dataclass(frozen=True)
class BeamGeometry:
    """Kicking-beam profile over the cloud."""

    sigma_beam: float               # m
    sigma_cloud: float              # m
    phi_d_max: float                # on-axis kicking strength
    cloud_cutoff: float = math.inf  # cloud truncation radius / sigma_cloud

    def __post_init__(self):
        if self.sigma_beam <= 0 or self.sigma_cloud <= 0:
            raise ValueError("beam and cloud widths must be positive")
        if self.phi_d_max < 0:
            raise ValueError("phi_d_max must be >= 0")
        if self.cloud_cutoff <= 0:
            raise ValueError("cloud_cutoff must be positive")

    @classmethod
    def paper_default(cls, phi_d_max):
        return cls(sigma_beam=CLOUD_SIGMA / math.sqrt(CAL_WIDTH_RATIO_SQ),
                   sigma_cloud=CLOUD_SIGMA, phi_d_max=phi_d_max,
                   cloud_cutoff=CAL_CLOUD_CUTOFF)

    @property
    def width_ratio_sq(self):
        return (self.sigma_cloud / self.sigma_beam) ** 2


def phi_d_radial(r, geometry: BeamGeometry):
    """Kicking strength at transverse radius r (m)."""
    if r < 0:
        raise ValueError("radius must be >= 0")
    return geometry.phi_d_max * math.exp(-r * r / (2.0 * geometry.sigma_beam**2))


def _exp_moment(geometry, power):
    """<(phi/phi_max)^power> over the truncated radial cloud, closed form."""
    t = geometry.width_ratio_sq * power
    xmax = 0.5 * geometry.cloud_cutoff**2
    if math.isinf(xmax):
        return 1.0 / (1.0 + t)
    return ((1.0 - math.exp(-(1.0 + t) * xmax)) /
            ((1.0 + t) * (1.0 - math.exp(-xmax))))


def phi_spread_moments(geometry: BeamGeometry):
    """(mean, std) of phi_d over the cloud, in units of phi_d_max."""
    m1 = _exp_moment(geometry, 1)
    m2 = _exp_moment(geometry, 2)
    return m1, math.sqrt(max(m2 - m1 * m1, 0.0))


def mean_phi_ratio(geometry: BeamGeometry):
    """Cloud-averaged phi_d as a fraction of phi_d_max (~0.77 for defaults)."""
    return _exp_moment(geometry, 1)


@dataclass(frozen=True)
class ZeemanWeights:
    """Relative coupling strength and population weight per F=4 substate."""

    strengths: np.ndarray
    weights: np.ndarray
    detuning_45: float

    def __post_init__(self):
        strengths = np.asarray(self.strengths, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if strengths.shape != weights.shape or strengths.ndim != 1:
            raise ValueError("strengths and weights must be matching 1-D arrays")
        if np.any(strengths <= 0):
            raise ValueError("strengths must be positive")
        if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
            raise ValueError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "strengths", strengths)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def for_detuning(cls, detuning_45, offset_54=CS_OFFSET_54,
                     offset_43=CS_OFFSET_43):
        """Equal-population substate couplings at the given 4->5 detuning.

        Reconstructed from the pi-transition angular-momentum factors of the
        F=4 -> F'=5,4,3 lines; the m-resolved strengths average to the
        usual line strengths 11/27, 7/36, 7/108.
        """
        m = np.arange(-4, 5)
        w5 = (25.0 - m**2) / 45.0
        w4 = 7.0 * m**2 / 240.0
        w3 = (16.0 - m**2) / 144.0
        d45 = detuning_45
        d44 = d45 + offset_54
        d43 = d44 + offset_43
        num = w5 / d45 + w4 / d44 + w3 / d43
        den = (11.0 / 27.0) / d45 + (7.0 / 36.0) / d44 + (7.0 / 108.0) / d43
        return cls(strengths=num / den, weights=np.full(9, 1.0 / 9.0),
                   detuning_45=detuning_45)


def sample_phi_d(rng, geometry: BeamGeometry, zeeman: ZeemanWeights | None = None):
    """Draw one trajectory's kicking strength.

    The radius comes from the (truncated) 2-D Gaussian cloud density by
    inverse CDF, so one uniform draw is consumed; an optional Zeeman factor
    consumes one more draw.
    """
    xmax = 0.5 * geometry.cloud_cutoff**2
    span = 1.0 if math.isinf(xmax) else 1.0 - math.exp(-xmax)
    x = -math.log1p(-rng.random() * span)   # x = r^2 / (2 sigma_cloud^2)
    phi = geometry.phi_d_max * math.exp(-geometry.width_ratio_sq * x)
    if zeeman is not None:
        idx = rng.choice(zeeman.strengths.size, p=zeeman.weights)
        phi *= zeeman.strengths[idx]
    return phi


@dataclass(frozen=True)
class PhiDSampler:
    """Picklable rng -> phi_d sampler for per-trajectory kick strengths."""

    geometry: BeamGeometry
    zeeman: ZeemanWeights | None = None

    def __call__(self, rng):
        return sample_phi_d(rng, self.geometry, self.zeeman)


def averaged_rate(phi_d_max, period, geometry: BeamGeometry, rate_fn,
                  rel_tol=1e-6):
    """Cloud-averaged diffusion rate, the radial integral of rate_fn.

    Integrates rate_fn(phi_d(r), T) against the cloud density 2 pi r rho(r)
    over the truncated disk.  rate_fn is typically one of the analytic
    rates; the geometry's own phi_d_max is ignored in favour of the
    explicit argument.
    """
    t = geometry.width_ratio_sq
    xmax = 0.5 * geometry.cloud_cutoff**2
    norm = 1.0 if math.isinf(xmax) else 1.0 - math.exp(-xmax)

    def integrand(x):
        return rate_fn(phi_d_max * math.exp(-t * x), period) * math.exp(-x)

    upper = np.inf if math.isinf(xmax) else xmax
    result = quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=rel_tol,
                  limit=200, full_output=1)
    if len(result) > 3:  # quad appends a message only when it struggles
        raise ArithmeticError(f"radial quadrature did not converge: {result[3]}")
    return result[0] / norm
