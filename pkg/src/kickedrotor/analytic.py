"""Closed-form diffusion rates and kick-summed energies for the kicked rotor.

The central object is the correlation-corrected bracket

    B(x) = 1/2 - J2(x) - J1(x)^2 + J2(x)^2 + J3(x)^2

which gives the initial quantum rate at x = K_q = 2 kappa sin(kbar/2)/kbar,
its experimental-units form at x = K_q' = 2 phi_d sin(4 omega_r T), and the
classical rate at x = kappa.  Rates are energies per kick; experimental
units are (two-photon recoils)^2 / 2.

Bessel functions of integer order 0..3 are evaluated here by ascending
series for small argument and by downward (Miller) recurrence otherwise,
to about 1e-10 absolute accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Series cancellation noise grows like e^x * eps, so the ascending series
# hands over to Miller recurrence early enough to keep evaluation noise
# near 1e-14; rate differences of near-identical arguments rely on that.
_SERIES_CUTOFF = 5.0
_MAX_BESSEL_ARG = 1e6


def _bessel_series(order, x):
    # ascending series sum_k (-1)^k (x/2)^(order+2k) / (k! (order+k)!)
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (order + k))
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)) and k > 4:
            return total


def _bessel_miller(x, max_order=3):
    # Downward recurrence from a start order well above x, normalized with
    # J0 + 2 sum J_{2k} = 1.  Returns J_0..J_max_order.  The start sits
    # ~8 x^(1/3) past the turning point so the spurious-solution admixture
    # decays below 1e-13 before the oscillatory region.
    start = int(x + 8.0 * x ** (1.0 / 3.0) + 50)
    if start % 2:
        start += 1
    jp, j = 0.0, 1e-30
    out = [0.0] * (max_order + 1)
    norm = 0.0
    for n in range(start, 0, -1):
        jm = (2.0 * n / x) * j - jp
        jp, j = j, jm
        if abs(j) > 1e250:  # rescale to avoid overflow
            scale = 1e-250
            j *= scale
            jp *= scale
            norm *= scale
            for i in range(max_order + 1):
                out[i] *= scale
        if n - 1 <= max_order:
            out[n - 1] = j
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += j
    norm = 2.0 * norm + out[0]
    return [v / norm for v in out]


def bessel_j(order, x):
    """First-kind Bessel function J_order(x) for integer order 0..3."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be an integer in 0..3, got {order}")
    if abs(x) >= _MAX_BESSEL_ARG:
        raise ValueError(f"|x| must be below {_MAX_BESSEL_ARG:g}, got {x}")
    sign = 1.0
    if x < 0.0:
        x = -x
        sign = -1.0 if order % 2 else 1.0  # J_n(-x) = (-1)^n J_n(x)
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x < _SERIES_CUTOFF:
        return sign * _bessel_series(order, x)
    return sign * _bessel_miller(x)[order]


def _bracket(x):
    j1 = bessel_j(1, x)
    j2 = bessel_j(2, x)
    j3 = bessel_j(3, x)
    return 0.5 - j2 - j1 * j1 + j2 * j2 + j3 * j3


def kq_scaled(kappa, kbar):
    """Quantum correlation argument K_q = 2 kappa sin(kbar/2) / kbar.

    Tends to kappa in the classical limit kbar -> 0; a series branch below
    kbar = 1e-8 avoids the 0/0.
    """
    if abs(kbar) < 1e-8:
        return kappa * (1.0 - kbar * kbar / 24.0)
    return 2.0 * kappa * math.sin(0.5 * kbar) / kbar


def shepelyansky_in_regime(kappa, kbar):
    """Whether (kappa, kbar) is inside the stated validity region of the
    initial quantum rate (kbar >= 1 and kappa >> kbar, proxied as >= 4 kbar)."""
    return kbar >= 1.0 and kappa >= 4.0 * kbar


def dq_initial(kappa, kbar):
    """Initial quantum diffusion rate in scaled units, (kappa^2/2) B(K_q).

    The Bessel truncation can go slightly negative; values are returned
    as computed.  Use shepelyansky_in_regime() to tag validity.
    """
    return 0.5 * kappa * kappa * _bracket(kq_scaled(kappa, kbar))


def dq_experimental(phi_d, period, omega_r):
    """Initial quantum rate in experimental units at fixed kicking strength.

    (phi_d^2/2) B(K_q') with K_q' = 2 phi_d sin(4 omega_r T); equals
    dq_initial(phi_d*kbar, kbar)/kbar^2 and is periodic in T with period
    2 pi / (8 omega_r).  The period is folded out exactly (fmod) before
    the sine, so the periodicity holds to the last float digit; the fold
    flips the sign of K_q' on alternate periods, which the even bracket
    cannot see.
    """
    if period <= 0.0:
        raise ValueError(f"period must be positive, got {period}")
    t_period = 2.0 * math.pi / (8.0 * omega_r)
    kq = 2.0 * phi_d * math.sin(4.0 * omega_r * math.fmod(period, t_period))
    return 0.5 * phi_d * phi_d * _bracket(kq)


def dcl_experimental(phi_d, period, omega_r):
    """Classical diffusion rate in experimental units.

    Same bracket evaluated at kappa = 8 omega_r T phi_d; oscillates about
    the quasilinear value phi_d^2/4.
    """
    if period < 0.0:
        raise ValueError(f"period must be non-negative, got {period}")
    kappa = 8.0 * omega_r * period * phi_d
    return 0.5 * phi_d * phi_d * _bracket(kappa)


def quasilinear(phi_d):
    """Uncorrelated random-phase rate phi_d^2/4 in experimental units."""
    return 0.25 * phi_d * phi_d


@dataclass(frozen=True)
class DiffusionPoint:
    """One (pulse period, rate) sample with its regime tag."""

    period: float          # s
    rate: float            # experimental units per kick
    regime: str            # "quantum-initial" | "classical" | "late-time"
    in_validity: bool = True

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if self.regime not in ("quantum-initial", "classical", "late-time"):
            raise ValueError(f"unknown regime tag {self.regime!r}")


def quantum_point(phi_d, period, omega_r):
    """Tagged initial quantum rate at (phi_d, T)."""
    kbar = 8.0 * omega_r * period
    return DiffusionPoint(period=period,
                          rate=dq_experimental(phi_d, period, omega_r),
                          regime="quantum-initial",
                          in_validity=shepelyansky_in_regime(phi_d * kbar, kbar))


@dataclass(frozen=True)
class RateSequence:
    """Per-kick diffusion rates D_0(n) from a decoherence-free simulation.

    saturated marks sequences long enough that the system has localized,
    letting the final value stand in for the (flat) tail.
    """

    values: np.ndarray
    saturated: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValueError("rates must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise ValueError("rates must be finite")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def late_time_rate(eta, rates, tail_tolerance=1e-6):
    """Decoherence-weighted late-time rate sum_n eta (1-eta)^n D_0(n).

    Past the end of the sequence the final value is extended geometrically,
    which is exact for a saturated (localized) sequence.  If the neglected
    weight (1-eta)^N exceeds tail_tolerance the sequence must be flagged
    saturated, otherwise the truncation is a precision error.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if not isinstance(rates, RateSequence):
        rates = RateSequence(np.asarray(rates, dtype=float))
    n = len(rates)
    tail_weight = (1.0 - eta) ** n
    if tail_weight > tail_tolerance and not rates.saturated:
        raise ValueError(
            f"sequence of {n} rates leaves weight {tail_weight:.3g} > "
            f"{tail_tolerance:.3g} unaccounted; extend it or flag saturated")
    weights = eta * (1.0 - eta) ** np.arange(n)
    return float(np.dot(weights, rates.values) + tail_weight * rates.values[-1])


def energy_after(kicks, rate_fn, initial_energy=0.0):
    """Energy after N kicks by summing per-kick rates, E'(N) = sum D'(n).

    rate_fn(n) is the rate model for kick n at whatever pulse period it was
    built for; initial_energy adds the thermal-cloud offset sigma^2/2.
    """
    if kicks < 1:
        raise ValueError(f"kicks must be >= 1, got {kicks}")
    return initial_energy + sum(rate_fn(n) for n in range(kicks))


def classical_rate_model(phi_d, period, omega_r):
    """Per-kick classical rate model: quasilinear for the first two kicks,
    then the Bessel-bracket classical rate."""
    d_quasi = quasilinear(phi_d)
    d_cl = dcl_experimental(phi_d, period, omega_r)

    def rate(n):
        return d_quasi if n < 2 else d_cl

    return rate


def classical_energy(phi_d, period, omega_r, kicks, initial_energy=0.0):
    """30-kick style classical energy curve value at one pulse period."""
    return energy_after(kicks, classical_rate_model(phi_d, period, omega_r),
                        initial_energy=initial_energy)
