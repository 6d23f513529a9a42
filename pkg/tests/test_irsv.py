import math

import numpy as np
import pytest
from scipy.integrate import quad

from irvol.core import ScaledGaps, generate_gaps
from irvol.irsv import (
    IrSvParams,
    forecast,
    observation_density,
    simulate_irsv,
    state_transition_density,
    stationary_state_density,
)

NEG_HALF_LOG_2PI = -0.9189385332046727


def batch_se(values, n_batches=50):
    values = np.asarray(values)
    usable = (values.size // n_batches) * n_batches
    batches = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(batches.std(ddof=1) / math.sqrt(n_batches))


class TestParams:
    def test_phi_bounds(self):
        with pytest.raises(ValueError):
            IrSvParams(0.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            IrSvParams(0.0, 0.0, 0.5)
        with pytest.raises(ValueError):
            IrSvParams(0.0, 1.2, 0.5)

    def test_sigma_positive(self):
        with pytest.raises(ValueError):
            IrSvParams(0.0, 0.5, 0.0)

    def test_stationary_var(self):
        p = IrSvParams(-9.0, 0.2, 0.8)
        assert p.stationary_var == pytest.approx(0.64 / 0.96)


class TestSimulate:
    def test_degenerate_state_noise(self):
        p = IrSvParams(-2.0, 0.5, 1e-300)
        gaps = generate_gaps(4999, 3.0, seed=1)
        path, r = simulate_irsv(p, gaps, 5000, seed=2)
        np.testing.assert_array_equal(path.h, np.full(5000, -2.0))
        assert np.var(r) == pytest.approx(math.exp(-2.0), rel=0.1)

    def test_stationary_variance(self):
        p = IrSvParams(-9.0, 0.2, 0.8)
        gaps = generate_gaps(4999, 3.0, seed=3)
        path, _ = simulate_irsv(p, gaps, 5000, seed=4)
        se = batch_se((path.h - path.h.mean()) ** 2)
        assert abs(np.var(path.h) - 0.64 / 0.96) < 3.0 * se

    def test_unit_gaps_reduce_to_ar1(self):
        p = IrSvParams(-9.0, 0.2, 0.8)
        gaps = ScaledGaps(np.ones(4999), 1.0)
        path, _ = simulate_irsv(p, gaps, 5000, seed=5)
        h = path.h
        lag1 = np.corrcoef(h[:-1], h[1:])[0, 1]
        assert abs(lag1 - 0.2) < 0.05

    def test_seeded_determinism(self):
        p = IrSvParams(-9.0, 0.6, 0.8)
        gaps = generate_gaps(99, 3.0, seed=6)
        a = simulate_irsv(p, gaps, 100, seed=7)
        b = simulate_irsv(p, gaps, 100, seed=7)
        np.testing.assert_array_equal(a[0].h, b[0].h)
        np.testing.assert_array_equal(a[1], b[1])

    def test_negative_phi_rejected(self):
        p = IrSvParams(0.0, -0.5, 1.0)
        with pytest.raises(ValueError, match="unsupported"):
            simulate_irsv(p, ScaledGaps(np.full(9, 0.5), 1.0), 10, seed=0)

    def test_needs_enough_gaps(self):
        p = IrSvParams(0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            simulate_irsv(p, np.array([0.5, 0.5]), 10, seed=0)

    def test_gap_time_covariance_of_h(self):
        # alternating gaps: every second pair of states is exactly one
        # time unit apart, exercising Cov(h_t, h_{t+l}) = s2 * phi**l
        p = IrSvParams(0.0, 0.7, 0.6)
        pattern = np.tile([0.4, 0.6], 100_000)
        gaps = ScaledGaps(pattern, 1.0)
        path, _ = simulate_irsv(p, gaps, pattern.size + 1, seed=8)
        h = path.h
        prod = (h[:-2] - h[:-2].mean()) * (h[2:] - h[2:].mean())
        expected = p.stationary_var * p.phi**1.0
        assert abs(prod.mean() - expected) < 3.0 * batch_se(prod)


class TestDensities:
    def test_transition_mode_at_conditional_mean(self):
        p = IrSvParams(1.0, 0.6, 0.9)
        gap = 0.37
        mean = p.mu + p.phi**gap * (2.5 - p.mu)
        at_mode = state_transition_density(mean, 2.5, gap, p)
        for offset in (-0.3, -0.05, 0.05, 0.3):
            assert state_transition_density(mean + offset, 2.5, gap, p) < at_mode

    def test_transition_unit_variance_case(self):
        # mu=0, phi=0.5, sigma=1, g=1: variance (1 - 0.25)/0.75 = 1
        p = IrSvParams(0.0, 0.5, 1.0)
        value = state_transition_density(0.0, 0.0, 1.0, p)
        assert value == pytest.approx(NEG_HALF_LOG_2PI, abs=1e-4)

    def test_unit_gap_variance_identity(self):
        # g=1 collapses the innovation variance to sigma_eta**2 exactly
        p = IrSvParams(0.0, 0.9, 0.7)
        lp = state_transition_density(0.3, 0.0, 1.0, p)
        var = p.sigma_eta**2
        expected = -0.5 * (math.log(2 * math.pi * var) + 0.09 / var)
        assert lp == pytest.approx(expected, rel=1e-12)

    def test_gap_range_enforced(self):
        p = IrSvParams(0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            state_transition_density(0.0, 0.0, 1.5, p)
        with pytest.raises(ValueError):
            state_transition_density(0.0, 0.0, 0.0, p)

    def test_stationary_density(self):
        p = IrSvParams(-1.0, 0.5, 1.0)
        var = p.stationary_var
        expected = -0.5 * (math.log(2 * math.pi * var))
        assert stationary_state_density(-1.0, p) == pytest.approx(expected, rel=1e-12)

    def test_observation_density_values(self):
        assert observation_density(0.0, 0.0) == pytest.approx(NEG_HALF_LOG_2PI, abs=1e-4)
        assert observation_density(1.0, 0.0) == pytest.approx(NEG_HALF_LOG_2PI - 0.5,
                                                              abs=1e-4)

    def test_observation_density_maximized_at_log_r2(self):
        r = 0.37
        hs = np.linspace(-6, 3, 2001)
        values = observation_density(r, hs)
        assert hs[np.argmax(values)] == pytest.approx(math.log(r**2), abs=0.01)

    def test_densities_integrate_to_one(self):
        p = IrSvParams(0.4, 0.8, 0.6)
        gap = 0.55
        cond_sd = math.sqrt(p.stationary_var * (1 - p.phi ** (2 * gap)))
        mean = p.mu + p.phi**gap * (1.2 - p.mu)
        total, _ = quad(lambda h: math.exp(state_transition_density(h, 1.2, gap, p)),
                        mean - 12 * cond_sd, mean + 12 * cond_sd)
        assert total == pytest.approx(1.0, abs=1e-6)

        h_fixed = -0.8
        obs_sd = math.exp(h_fixed / 2.0)
        total, _ = quad(lambda r: math.exp(observation_density(r, h_fixed)),
                        -12 * obs_sd, 12 * obs_sd)
        assert total == pytest.approx(1.0, abs=1e-6)

        stat_sd = math.sqrt(p.stationary_var)
        total, _ = quad(lambda h: math.exp(stationary_state_density(h, p)),
                        p.mu - 12 * stat_sd, p.mu + 12 * stat_sd)
        assert total == pytest.approx(1.0, abs=1e-6)


class TestForecast:
    def test_noiseless_recursion_is_exact(self):
        p = IrSvParams(-1.0, 0.7, 1e-300)
        gaps = np.array([0.5, 0.25, 1.0])
        out = forecast(p, 2.0, gaps, n_draws=100, seed=0)
        expected = [p.mu + p.phi ** np.sum(gaps[: k + 1]) * (2.0 - p.mu)
                    for k in range(3)]
        np.testing.assert_allclose(out.h_mean, expected, rtol=1e-12)

    def test_one_step_conditional_mean(self):
        p = IrSvParams(0.0, 0.5, 1e-300)
        out = forecast(p, 2.0, [1.0], n_draws=10, seed=1)
        assert out.h_mean[0] == 1.0

    def test_long_horizon_reverts_to_mu(self):
        p = IrSvParams(-3.0, 0.6, 0.5)
        gaps = np.ones(400)
        out = forecast(p, 4.0, gaps, n_draws=4000, seed=2)
        se = math.sqrt(p.stationary_var / 4000)
        assert abs(out.h_mean[-1] - p.mu) < 4.0 * se

    def test_r2_is_exp_h(self):
        p = IrSvParams(-2.0, 0.5, 0.4)
        out = forecast(p, -2.0, [0.5, 1.0], n_draws=500, seed=3)
        assert np.all(out.r2_mean > 0)
        assert np.all(out.r2_q025 <= out.r2_q500)
        assert np.all(out.r2_q500 <= out.r2_q975)

    def test_empty_gaps_rejected(self):
        p = IrSvParams(0.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            forecast(p, 0.0, [], 10)

    def test_deterministic(self):
        p = IrSvParams(0.0, 0.5, 1.0)
        a = forecast(p, 0.3, [0.5, 0.5], 64, seed=9)
        b = forecast(p, 0.3, [0.5, 0.5], 64, seed=9)
        np.testing.assert_array_equal(a.h_mean, b.h_mean)
        np.testing.assert_array_equal(a.r2_q975, b.r2_q975)
