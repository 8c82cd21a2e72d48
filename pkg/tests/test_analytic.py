import math

import numpy as np
import pytest
from scipy.special import jv  # independent oracle for the hand-rolled Bessels

from kickedrotor import analytic, units

OMEGA_R = units.caesium_omega_r()


class TestBessel:
    def test_zero_argument(self):
        assert analytic.bessel_j(0, 0.0) == 1.0
        for order in (1, 2, 3):
            assert analytic.bessel_j(order, 0.0) == 0.0

    def test_frozen_values(self):
        # frozen from the scipy oracle
        assert analytic.bessel_j(1, 1.5) == pytest.approx(0.5579365079100995, abs=1e-10)
        assert analytic.bessel_j(2, 5.0) == pytest.approx(0.04656511627775229, abs=1e-10)

    def test_against_library_oracle(self):
        xs = np.concatenate([np.linspace(0.0, 11.9, 60),
                             np.linspace(12.0, 60.0, 60),
                             [100.0, 400.0, 1e4, 9e5]])
        for order in range(4):
            for x in xs:
                assert analytic.bessel_j(order, float(x)) == pytest.approx(
                    float(jv(order, x)), abs=1e-10)

    def test_negative_argument_parity(self):
        for order in range(4):
            ref = (-1.0) ** order * analytic.bessel_j(order, 7.3)
            assert analytic.bessel_j(order, -7.3) == pytest.approx(ref, abs=1e-12)

    def test_recurrence(self):
        # J_{n-1}(x) + J_{n+1}(x) = (2n/x) J_n(x)
        for x in np.linspace(0.1, 50.0, 120):
            for n in (1, 2):
                lhs = analytic.bessel_j(n - 1, x) + analytic.bessel_j(n + 1, x)
                rhs = 2 * n / x * analytic.bessel_j(n, x)
                assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            analytic.bessel_j(4, 1.0)
        with pytest.raises(ValueError):
            analytic.bessel_j(-1, 1.0)
        with pytest.raises(ValueError):
            analytic.bessel_j(0, 2e6)


class TestKq:
    def test_resonance_zero(self):
        for kappa in (1.0, 5.0, 20.0):
            assert analytic.kq_scaled(kappa, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)

    def test_classical_limit_series_branch(self):
        assert analytic.kq_scaled(7.0, 1e-9) == pytest.approx(7.0, rel=1e-12)
        assert analytic.kq_scaled(7.0, 0.0) == 7.0

    def test_direct_value(self):
        assert analytic.kq_scaled(10.0, 2.0) == pytest.approx(8.414709848078965, rel=1e-14)


class TestQuantumRate:
    def test_resonant_value_is_quasilinear_kappa(self):
        # K_q = 0 leaves only the 1/2 term
        for kappa in (3.0, 12.0):
            assert analytic.dq_initial(kappa, 2 * math.pi) == pytest.approx(
                kappa**2 / 4, rel=1e-12)

    def test_frozen_value(self):
        assert analytic.dq_initial(12.0, 2.08) == pytest.approx(22.26505387318318, rel=1e-10)

    def test_bracket_bounds(self):
        # |J1| <= 0.5819, |J2| <= 0.4866, |J3| <= 0.4344 pin the bracket range
        lo = 0.5 - 0.4866 - 0.5819**2
        hi = 0.5 + 0.4866 + 0.4866**2 + 0.4344**2
        rng = np.random.default_rng(2)
        for _ in range(300):
            kappa = rng.uniform(0.1, 30.0)
            kbar = rng.uniform(0.05, 7.0)
            value = analytic.dq_initial(kappa, kbar) / (kappa**2 / 2)
            assert lo <= value <= hi

    def test_consistency_with_experimental_form(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            phi_d = rng.uniform(0.5, 8.0)
            period = rng.uniform(2e-6, 9e-5)
            kbar = 8 * OMEGA_R * period
            assert analytic.dq_experimental(phi_d, period, OMEGA_R) * kbar**2 == \
                pytest.approx(analytic.dq_initial(phi_d * kbar, kbar), rel=1e-10)

    def test_classical_limit_matches_dcl(self):
        # kbar -> 0 at fixed kappa turns Eq. 4 into Eq. 6
        for kappa in (2.0, 8.0, 15.0):
            quantum = analytic.dq_initial(kappa, 1e-9)
            phi_d = 1.0
            period = kappa / (8 * OMEGA_R * phi_d)
            classical = analytic.dcl_experimental(phi_d, period, OMEGA_R) * 2 / phi_d**2
            assert quantum == pytest.approx(kappa**2 / 2 * classical, rel=1e-8)

    def test_quasilinear_at_resonant_periods(self):
        # sin(4 omega_r T) = 0 at multiples of the resonance period
        for m in (1, 2, 3):
            period = m * math.pi / (4 * OMEGA_R)
            for phi_d in (3.0, 7.5):
                assert analytic.dq_experimental(phi_d, period, OMEGA_R) == pytest.approx(
                    phi_d**2 / 4, rel=1e-12)

    def test_periodicity_in_period(self):
        rng = np.random.default_rng(4)
        step = 2 * math.pi / (8 * OMEGA_R)
        for _ in range(100):
            phi_d = rng.uniform(0.5, 8.0)
            period = rng.uniform(1e-6, 1e-4)
            a = analytic.dq_experimental(phi_d, period, OMEGA_R)
            b = analytic.dq_experimental(phi_d, period + step, OMEGA_R)
            assert b == pytest.approx(a, abs=1e-12)

    def test_zero_strength(self):
        assert analytic.dq_experimental(0.0, 2e-5, OMEGA_R) == 0.0

    def test_regime_tagging(self):
        assert analytic.shepelyansky_in_regime(10.0, 2.0)
        assert not analytic.shepelyansky_in_regime(10.0, 0.5)
        assert not analytic.shepelyansky_in_regime(4.0, 2.0)
        point = analytic.quantum_point(5.0, 20e-6, OMEGA_R)
        assert point.regime == "quantum-initial"
        assert point.in_validity

    def test_diffusion_point_validation(self):
        with pytest.raises(ValueError):
            analytic.DiffusionPoint(period=0.0, rate=1.0, regime="classical")
        with pytest.raises(ValueError):
            analytic.DiffusionPoint(period=1e-5, rate=1.0, regime="bogus")


class TestClassicalRate:
    def test_zero_period_is_quasilinear(self):
        assert analytic.dcl_experimental(4.0, 0.0, OMEGA_R) == pytest.approx(4.0, rel=1e-12)

    def test_frozen_value(self):
        assert analytic.dcl_experimental(5.0, 20e-6, OMEGA_R) == pytest.approx(
            4.228203274927402, rel=1e-10)

    def test_large_kappa_envelope(self):
        # oscillation about phi_d^2/4 decays like the Bessel amplitude
        phi_d = 5.0
        for kappa in np.linspace(20.0, 800.0, 60):
            period = kappa / (8 * OMEGA_R * phi_d)
            amp = 1.1 * math.sqrt(2 / (math.pi * kappa))
            bound = phi_d**2 / 2 * (amp + 3 * amp**2)
            value = analytic.dcl_experimental(phi_d, period, OMEGA_R)
            assert abs(value - phi_d**2 / 4) <= bound

    def test_negative_period_rejected(self):
        with pytest.raises(ValueError):
            analytic.dcl_experimental(5.0, -1e-6, OMEGA_R)


class TestLateTimeRate:
    def test_constant_sequence(self):
        rates = analytic.RateSequence(np.full(2000, 3.7))
        assert analytic.late_time_rate(0.01, rates) == pytest.approx(3.7, rel=1e-12)

    def test_single_spike(self):
        values = np.zeros(50)
        values[0] = 2.5
        rates = analytic.RateSequence(values, saturated=True)
        assert analytic.late_time_rate(0.1, rates) == pytest.approx(0.25, rel=1e-12)

    def test_eta_domain(self):
        rates = analytic.RateSequence(np.ones(10), saturated=True)
        for eta in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                analytic.late_time_rate(eta, rates)

    def test_short_unsaturated_sequence_rejected(self):
        with pytest.raises(ValueError, match="saturated"):
            analytic.late_time_rate(0.01, analytic.RateSequence(np.ones(10)))
        # same sequence flagged saturated is fine
        assert analytic.late_time_rate(0.01, analytic.RateSequence(
            np.ones(10), saturated=True)) == pytest.approx(1.0)

    def test_convex_combination(self):
        rng = np.random.default_rng(5)
        values = rng.uniform(0.5, 4.0, 80)
        rates = analytic.RateSequence(values, saturated=True)
        result = analytic.late_time_rate(0.05, rates)
        assert values.min() <= result <= values.max()

    def test_rate_sequence_validation(self):
        with pytest.raises(ValueError):
            analytic.RateSequence(np.array([]))
        with pytest.raises(ValueError):
            analytic.RateSequence(np.array([1.0, np.inf]))


class TestEnergyAfter:
    def test_single_kick_quasilinear(self):
        phi_d = 3.0
        model = analytic.classical_rate_model(phi_d, 30e-6, OMEGA_R)
        assert analytic.energy_after(1, model) == pytest.approx(phi_d**2 / 4)

    def test_constant_rate(self):
        assert analytic.energy_after(30, lambda n: 1.5) == pytest.approx(45.0)

    def test_initial_energy_offset(self):
        assert analytic.energy_after(2, lambda n: 1.0, initial_energy=8.0) == 10.0

    def test_kick_count_domain(self):
        with pytest.raises(ValueError):
            analytic.energy_after(0, lambda n: 1.0)

    def test_classical_model_structure(self):
        phi_d = 5.9
        period = 50e-6
        model = analytic.classical_rate_model(phi_d, period, OMEGA_R)
        assert model(0) == model(1) == pytest.approx(phi_d**2 / 4)
        assert model(2) == pytest.approx(analytic.dcl_experimental(phi_d, period, OMEGA_R))
        total = analytic.classical_energy(phi_d, period, OMEGA_R, 30)
        assert total == pytest.approx(2 * model(0) + 28 * model(2), rel=1e-12)

    def test_classical_long_period_scale(self):
        # 30-kick energies at phi_d = 5.9 oscillate about the high-200s at long T
        values = [analytic.classical_energy(5.9, t * 1e-6, OMEGA_R, 30)
                  for t in np.linspace(40, 70, 121)]
        assert np.mean(values) == pytest.approx(30 * 5.9**2 / 4, rel=0.1)
