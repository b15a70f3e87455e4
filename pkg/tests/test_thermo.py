import math

import numpy as np
import pytest

from conftest import random_branch, random_config
from oracles import sigma_direct
from qtricycle import (
    ConvergenceError,
    PositivityError,
    branch_entropy_change,
    branch_heat,
    effective_temperature,
    equilibrium_entropy,
    gibbs_state,
    perturbed_state,
    sigma_coefficient,
    ts_trajectory,
    von_neumann_entropy,
)
from qtricycle.thermo import gauss_legendre_adaptive


class TestQuadrature:
    def test_polynomial(self):
        assert gauss_legendre_adaptive(lambda s: s ** 3) == pytest.approx(0.25, rel=1e-14)

    def test_oscillatory(self):
        val = gauss_legendre_adaptive(lambda s: np.sin(8 * np.pi * s) ** 2)
        assert val == pytest.approx(0.5, rel=1e-12)

    def test_zero_integrand(self):
        assert gauss_legendre_adaptive(lambda s: np.zeros_like(s)) == 0.0

    def test_non_convergence_reported(self):
        with pytest.raises(ConvergenceError):
            gauss_legendre_adaptive(lambda s: s, start_panels=128, max_panels=64)


class TestEquilibriumEntropy:
    def test_pure_state_limit(self):
        assert equilibrium_entropy(1.0, 60.0) < 1e-24

    def test_maximally_mixed_limit(self):
        assert equilibrium_entropy(1.0, 1e-8) == pytest.approx(math.log(2.0), abs=1e-8)

    def test_third_population_point(self):
        expected = math.log(3.0) - (2.0 / 3.0) * math.log(2.0)
        assert equilibrium_entropy(1.0, math.log(2.0)) == pytest.approx(expected, rel=1e-12)

    def test_matches_von_neumann_of_gibbs(self, rng):
        for _ in range(30):
            T = rng.uniform(0.1, 2.0)
            w = rng.uniform(0.1, 5.0)
            assert equilibrium_entropy(T, w) == pytest.approx(
                von_neumann_entropy(gibbs_state(T, w)), rel=1e-12)


class TestEntropyChange:
    def test_default_signs(self, default_config):
        assert branch_entropy_change(default_config.branch("c", 9.0)) > 0.0
        assert branch_entropy_change(default_config.branch("h", 9.0)) > 0.0
        assert branch_entropy_change(default_config.branch("p", 11.0)) < 0.0

    def test_nearly_frozen_schedule(self, default_config):
        # delta -> 0 freezes the endpoints, so the change collapses with it
        cfg = type(default_config)(delta_c=1e-10)
        assert abs(branch_entropy_change(cfg.branch("c", 9.0))) < 1e-9

    def test_closure_around_cycle(self, rng):
        for _ in range(50):
            cfg = random_config(rng)
            total = sum(branch_entropy_change(cfg.branch(r, 1.0)) for r in "chp")
            assert abs(total) < 1e-10


class TestSigmaCoefficient:
    def test_always_nonpositive(self, rng):
        for _ in range(50):
            assert sigma_coefficient(random_branch(rng)) <= 0.0

    def test_nearly_frozen_schedule_vanishes(self, default_config):
        cfg = type(default_config)(delta_c=1e-10)
        assert abs(sigma_coefficient(cfg.branch("c", 9.0))) < 1e-12

    def test_against_direct_trace_integral(self, rng):
        # also exercised at scale by the acceptance suite
        for _ in range(5):
            branch = random_branch(rng)
            closed = sigma_coefficient(branch)
            direct = sigma_direct(branch)
            assert closed == pytest.approx(direct, rel=1e-6)


class TestBranchHeat:
    def test_identities(self, default_config):
        b = default_config.branch("c", 9.0)
        bt = branch_heat(b, 9.0)
        assert bt.Q0 == pytest.approx(b.temperature * bt.dS_eq, rel=1e-12)
        assert bt.Q1 == pytest.approx(b.temperature * bt.Sigma / 9.0, rel=1e-12)
        assert bt.Q == bt.Q0 + bt.Q1
        assert bt.Q < bt.Q0  # finite-time correction always costs heat

    def test_quasistatic_limit(self, default_config):
        bt = branch_heat(default_config.branch("c", 1.0), 1e9)
        assert abs(bt.Q1) < 1e-8 * abs(bt.Q0)
        assert bt.Q == pytest.approx(bt.Q0, rel=1e-8)

    def test_inverse_duration_scaling(self, default_config):
        b = default_config.branch("h", 8.0)
        assert branch_heat(b, 4.0).Q1 == 2.0 * branch_heat(b, 8.0).Q1

    def test_direct_first_order_heat(self, rng):
        for _ in range(3):
            branch = random_branch(rng)
            tau = float(rng.uniform(5.0, 50.0))
            bt = branch_heat(branch, tau)
            direct_Q1 = branch.temperature * sigma_direct(branch) / tau
            assert bt.Q1 == pytest.approx(direct_Q1, rel=1e-6)

    def test_domain(self, default_config):
        with pytest.raises(ValueError):
            branch_heat(default_config.branch("c", 1.0), 0.0)


class TestPerturbedState:
    def test_endpoints_are_thermal(self, default_config):
        from qtricycle.protocol import frequency
        for res, tau in (("c", 9.0), ("h", 7.0), ("p", 11.0)):
            b = default_config.branch(res, tau)
            for s in (0.0, 1.0):
                state = perturbed_state(b, s, tau)
                ref = gibbs_state(b.temperature, frequency(b, s))
                assert abs(state.rho11 - ref.rho11) < 1e-15

    def test_lag_shrinks_as_inverse_duration(self, default_config):
        from qtricycle.protocol import frequency
        b = default_config.branch("c", 1.0)
        ss = np.linspace(0.0, 1.0, 41)

        def max_gap(tau):
            gaps = []
            for s in ss:
                ref = gibbs_state(b.temperature, frequency(b, float(s)))
                gaps.append(abs(perturbed_state(b, float(s), tau).rho11 - ref.rho11))
            return max(gaps)

        g100, g200 = max_gap(100.0), max_gap(200.0)
        assert g200 < g100
        assert g200 / g100 == pytest.approx(0.5, rel=1e-6)

    def test_trace_exact_and_valid(self, rng):
        for _ in range(30):
            branch = random_branch(rng)
            state = perturbed_state(branch, float(rng.uniform(0, 1)), float(rng.uniform(20, 200)))
            assert abs(state.rho11 + state.rho00 - 1.0) < 1e-12
            assert state.rho10 == 0.0 and state.rho01 == 0.0
            state.validate()

    def test_too_fast_driving_reported(self, default_config):
        b = default_config.branch("c", 1.0)
        with pytest.raises(PositivityError):
            perturbed_state(b, 0.9, 1e-4)


class TestEffectiveTemperature:
    def test_inverts_gibbs(self, rng):
        for _ in range(30):
            T = float(rng.uniform(0.1, 2.0))
            w = float(rng.uniform(0.1, 5.0))
            assert effective_temperature(gibbs_state(T, w), w) == pytest.approx(T, rel=1e-12)

    def test_direct_value(self):
        from qtricycle import DensityVector
        state = DensityVector.from_populations(1.0 / 3.0)
        assert effective_temperature(state, 1.0) == pytest.approx(1.0 / math.log(2.0), rel=1e-12)

    def test_equal_populations_undefined(self):
        from qtricycle import DensityVector
        with pytest.raises(ValueError):
            effective_temperature(DensityVector.from_populations(0.5), 1.0)

    def test_inversion_flagged_negative(self):
        from qtricycle import DensityVector
        assert effective_temperature(DensityVector.from_populations(0.7), 1.0) < 0.0


class TestTSTrajectory:
    def test_entropy_continuous_across_quenches(self, default_config):
        taus = (9.0, 10.705783157435498, 11.0)
        points = ts_trajectory(default_config, taus, samples_per_branch=51)
        cold = [p for p in points if p.reservoir == "c"]
        hot = [p for p in points if p.reservoir == "h"]
        pump = [p for p in points if p.reservoir == "p"]
        assert abs(cold[-1].S - hot[0].S) < 1e-10
        assert abs(hot[-1].S - pump[0].S) < 1e-10
        assert abs(pump[-1].S - cold[0].S) < 1e-10  # closed loop

    def test_effective_temperature_jump_ratio(self, default_config):
        taus = (9.0, 10.705783157435498, 11.0)
        points = ts_trajectory(default_config, taus, samples_per_branch=21)
        cold = [p for p in points if p.reservoir == "c"]
        hot = [p for p in points if p.reservoir == "h"]
        ratio = hot[0].T_eff / cold[-1].T_eff
        assert ratio == pytest.approx(default_config.T_h / default_config.T_c, rel=1e-10)

    def test_reversible_amplitude_closes_isotherms(self, default_config):
        from qtricycle import reversible_amplitude
        cfg = type(default_config)(delta_c=reversible_amplitude(default_config))
        taus = (1e8, 1e8, 1e8)
        points = ts_trajectory(cfg, taus, samples_per_branch=11)
        for res, T in (("c", cfg.T_c), ("h", cfg.T_h), ("p", cfg.T_p)):
            branch_points = [p for p in points if p.reservoir == res]
            for p in branch_points:
                assert p.T_eff == pytest.approx(T, rel=1e-6)
        assert abs(points[-1].S - points[0].S) < 1e-10

    def test_sample_count_validation(self, default_config):
        with pytest.raises(ValueError):
            ts_trajectory(default_config, (9.0, 10.0, 11.0), samples_per_branch=1)
