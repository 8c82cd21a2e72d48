import math

import numpy as np
import pytest

from kickedrotor import units


OMEGA_R = units.caesium_omega_r()


def test_kbar_at_quantum_resonance_period():
    # 60.4 us is the observed resonance location; kbar there is 2 pi to ~0.2%
    kbar = units.kbar_from_period(60.4e-6, 2 * math.pi * 2066.0)
    assert kbar == pytest.approx(2 * math.pi, rel=5e-3)


def test_kbar_rejects_nonpositive_inputs():
    with pytest.raises(ValueError):
        units.kbar_from_period(0.0, OMEGA_R)
    with pytest.raises(ValueError):
        units.kbar_from_period(1e-5, -1.0)


def test_kbar_linear_in_period():
    # half the resonance period gives kbar = pi
    assert units.kbar_from_period(30.2e-6, 2 * math.pi * 2066.0) == pytest.approx(
        math.pi, rel=5e-3)
    assert 2 * units.kbar_from_period(30.2e-6, OMEGA_R) == pytest.approx(
        units.kbar_from_period(60.4e-6, OMEGA_R), rel=1e-15)


def test_caesium_resonance_period_within_quoted_band():
    # kbar = 2 pi at T* = 2 pi / (8 omega_r); the paper locates it at 60.4 us
    t_star = 2 * math.pi / (8 * OMEGA_R)
    assert abs(t_star - 60.5e-6) <= 0.2e-6


def test_omega_eff_single_line_limit():
    rabi = 2 * math.pi * 50e6
    d45 = 2 * math.pi * 400e6
    value = units.omega_eff(rabi, d45, line_strengths=(11 / 27, 0.0, 0.0))
    assert value == pytest.approx(rabi**2 * (11 / 27) / d45, rel=1e-15)


def test_omega_eff_quadratic_in_rabi():
    d45 = 2 * math.pi * 315e6
    one = units.omega_eff(2 * math.pi * 34e6, d45)
    two = units.omega_eff(2 * math.pi * 68e6, d45)
    assert two == pytest.approx(4 * one, rel=1e-14)


def test_omega_eff_zero_detuning_rejected():
    with pytest.raises(ValueError):
        units.omega_eff(1e8, 0.0)
    # a negative detuning cancelling an offset also hits a pole
    with pytest.raises(ValueError):
        units.omega_eff(1e8, -units.CS_OFFSET_54)


def test_quoted_rabi_reproduces_paper_phi_d():
    # 34 MHz quoted at 315 MHz detuning, read as Omega/2, gives phi_d near 3.3
    phys = units.PhysicalParams.caesium()
    assert phys.phi_d() == pytest.approx(3.3, rel=0.15)
    # read as Omega instead, the kick strength drops fourfold
    other = units.PhysicalParams.caesium(quoted_is_half_rabi=False)
    assert other.phi_d() == pytest.approx(phys.phi_d() / 4, rel=1e-12)


def test_phi_d_from_examples():
    assert units.phi_d_from(0.0, 520e-9) == 0.0
    tau = 520e-9
    assert units.phi_d_from(8.0 / tau, tau) == pytest.approx(1.0, rel=1e-14)
    # direct arithmetic oracle: 1.25e8 * 520e-9 / 8 = 8.125
    assert units.phi_d_from(1.25e8, 520e-9) == pytest.approx(8.125, rel=1e-12)


def test_momentum_to_experimental():
    assert units.momentum_to_experimental(0.0, 2.0) == 0.0
    assert units.momentum_to_experimental(2.0, 2.0) == 1.0
    assert units.momentum_to_experimental(2 * math.pi * 4, 2 * math.pi) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        units.momentum_to_experimental(1.0, 0.0)


def test_round_trip_kappa_identity():
    # phi_d(omega_eff, tau) * kbar(T) must equal kappa = omega_eff omega_r T tau
    rng = np.random.default_rng(1)
    for _ in range(50):
        rabi = 2 * math.pi * rng.uniform(10e6, 100e6)
        d45 = 2 * math.pi * rng.uniform(100e6, 900e6)
        tau = rng.uniform(100e-9, 2e-6)
        period = rng.uniform(2e-6, 80e-6)
        oe = units.omega_eff(rabi, d45)
        kappa_direct = oe * OMEGA_R * period * tau
        kappa_composed = units.phi_d_from(oe, tau) * units.kbar_from_period(period, OMEGA_R)
        assert kappa_composed == pytest.approx(kappa_direct, rel=1e-12)


def test_conversions_are_pure():
    args = (2 * math.pi * 40e6, 2 * math.pi * 315e6)
    assert units.omega_eff(*args) == units.omega_eff(*args)
    assert units.kbar_from_period(20e-6, OMEGA_R) == units.kbar_from_period(20e-6, OMEGA_R)


def test_physical_params_validation():
    phys = units.PhysicalParams.caesium()
    assert phys.line_strengths == (11 / 27, 7 / 36, 7 / 108)
    with pytest.raises(ValueError):
        units.PhysicalParams(recoil_frequency=1.0, lattice_wavenumber=phys.lattice_wavenumber,
                             atom_mass=phys.atom_mass, pulse_length=520e-9,
                             rabi=1e8, detuning_45=1e9)
    with pytest.raises(ValueError):
        units.PhysicalParams.caesium(pulse_length=-1e-9)


def test_scaled_params():
    sc = units.ScaledParams.from_period(5.0, 20e-6, OMEGA_R, 520e-9, eta=0.0125)
    assert sc.kbar == pytest.approx(8 * OMEGA_R * 20e-6)
    assert sc.kappa == pytest.approx(5.0 * sc.kbar)
    assert sc.alpha == pytest.approx(520e-9 / 20e-6)
    assert sc.square_strength == pytest.approx(sc.kappa / sc.alpha)
    with pytest.raises(ValueError):
        units.ScaledParams(kbar=2.0, kappa=1.0, phi_d=5.0, alpha=0.1, eta=0.0, period=1e-5)
    with pytest.raises(ValueError):
        units.ScaledParams(kbar=2.0, kappa=10.0, phi_d=5.0, alpha=0.1, eta=1.0, period=1e-5)
