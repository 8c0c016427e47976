import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from diffts import (CalibratedVariances, ConfigurationError, DegenerateError, DiffusionSchedule, NoiseMode, Observation,
                    build_schedule, calibrate, combine_precision, diffused_observation_std, posterior_sample,
                    posterior_sample_direct_mix, posterior_sample_noisy_mix, product_gaussian_combine,
                    sample_unconditional)

from conftest import POINT_MASS, gaussian_denoiser


def exact_sigma(schedule, dim):
    return CalibratedVariances(np.tile(np.sqrt(1 - schedule.alpha_bar[1:])[:, None], (1, dim)))


class TestCombine:
    def test_equal_std(self, rng):
        x = product_gaussian_combine(1.0, 0.5, 3.0, 0.5, rng, size=100000)
        se_m = np.sqrt(0.125 / len(x))
        assert abs(x.mean() - 2.0) < 4 * se_m
        assert abs(x.var() - 0.125) < 4 * 0.125 * np.sqrt(2 / len(x))

    def test_mc_example(self, rng):
        x = product_gaussian_combine(0.0, 1.0, 2.0, 1.0, rng, size=100000)
        assert abs(x.mean() - 1.0) < 4 * np.sqrt(0.5 / 1e5)
        assert abs(x.var() - 0.5) < 4 * 0.5 * np.sqrt(2 / 1e5)

    def test_zero_std_wins(self, rng):
        assert np.all(product_gaussian_combine(0.0, 1.0, 2.5, 0.0, rng, size=10) == 2.5)
        assert np.all(product_gaussian_combine(-1.0, 0.0, 2.5, 3.0, rng, size=10) == -1.0)

    def test_both_zero(self, rng):
        with pytest.raises(DegenerateError):
            product_gaussian_combine(0.0, 0.0, 1.0, 0.0, rng)
        with pytest.raises(DegenerateError):
            combine_precision(0.0, 0.0, 1.0, 0.0)

    def test_ks_against_closed_form(self):
        rng = np.random.default_rng(7)
        mu1, s1, mu2, s2 = -0.3, 0.7, 1.2, 1.5
        x = product_gaussian_combine(mu1, s1, mu2, s2, rng, size=100000)
        p1, p2 = s1 ** -2, s2 ** -2
        m, sd = (p1 * mu1 + p2 * mu2) / (p1 + p2), (p1 + p2) ** -0.5
        assert stats.kstest(x, "norm", args=(m, sd)).pvalue > 0.001


class TestDiffusedObservationStd:
    def test_example(self):
        ab = np.array([1.0, 0.6, 0.5])
        sched = DiffusionSchedule(np.r_[1.0, ab[1:] / ab[:-1]], ab, 0.4, 1 / 6)
        assert diffused_observation_std(sched, 1, 0.1, 0.2) == pytest.approx(np.sqrt(0.022))
        assert np.sqrt(0.022) == pytest.approx(0.1483, abs=1e-4)

    def test_step_zero_limit(self, schedule):
        assert diffused_observation_std(schedule, 0, 0.3, 5.0) == pytest.approx(0.3)

    @settings(max_examples=50, deadline=None)
    @given(step=st.integers(0, 99), s=st.floats(0, 2), ds=st.floats(0, 1), h=st.floats(0, 2), dh=st.floats(0, 1))
    def test_monotone(self, step, s, ds, h, dh):
        sched = build_schedule()
        base = diffused_observation_std(sched, step, s, h)
        assert diffused_observation_std(sched, step, s + ds, h) >= base
        assert diffused_observation_std(sched, step, s, h + dh) >= base


class TestObservation:
    def test_masked_values_zeroed(self):
        o = Observation([1.0, 2.0], [True, False], 0.1)
        assert o.y[1] == 0 and o.sigma_obs.shape == (2,)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Observation([1.0, 2.0], [True], 0.1)

    def test_negative_std(self):
        with pytest.raises(ConfigurationError):
            Observation([1.0], [True], -0.1)


class TestPosteriorSample:
    def test_empty_mask_matches_unconditional(self, schedule):
        model = gaussian_denoiser(schedule, 3)
        sig = exact_sigma(schedule, 3)
        obs = Observation(np.ones((5, 3)), np.zeros((5, 3), bool), 0.1)
        a = posterior_sample(model, sig, obs, rng=np.random.default_rng(3))
        b = sample_unconditional(model, sig, np.random.default_rng(3), n=5)
        assert np.array_equal(a, b)

    def test_empty_mask_chain_matches(self, schedule):
        model = gaussian_denoiser(schedule, 2)
        sig = exact_sigma(schedule, 2)
        _, chain = posterior_sample(model, sig, Observation.empty(2), rng=np.random.default_rng(4),
                                    return_chain=True)
        r = np.random.default_rng(4)
        x = r.standard_normal((1, 2))
        assert np.array_equal(chain[-1], x)
        from diffts import reverse_kernel
        for next_step in range(schedule.n_steps, 0, -1):
            mean, std, _ = reverse_kernel(model, x, next_step, sig)
            x = mean + std * r.standard_normal(x.shape)
            assert np.array_equal(chain[next_step - 1], x)

    def test_moves_towards_evidence(self, schedule, rng):
        model = gaussian_denoiser(schedule, 1)
        obs = Observation(np.full((4000, 1), 2.0), np.ones((4000, 1), bool), 0.3)
        x = posterior_sample(model, exact_sigma(schedule, 1), obs, rng=rng)
        assert 1.5 < x.mean() < 2.1
        assert x.var() < 0.5

    def test_unobserved_coordinates_follow_prior(self, schedule, rng):
        model = gaussian_denoiser(schedule, 2)
        obs = Observation(np.tile([3.0, 0.0], (4000, 1)), np.tile([True, False], (4000, 1)), 0.1)
        x = posterior_sample(model, exact_sigma(schedule, 2), obs, rng=rng)
        assert abs(x[:, 1].mean()) < 4 / np.sqrt(4000)

    def test_exact_observation(self, schedule, rng):
        model = gaussian_denoiser(schedule, 3)
        y = np.array([0.4, -1.0, 2.0])
        x = posterior_sample(model, CalibratedVariances.zeros(100, 3), Observation(y, np.ones(3, bool), 0.0), rng=rng)
        assert np.array_equal(x, y)

    def test_consistency_limit(self, point_mass_model):
        rng = np.random.default_rng(11)
        sig = calibrate(point_mass_model, np.tile(POINT_MASS, (200, 1)), rng)
        y = np.array([0.2, 0.9, 0.4, 0.6])
        obs = Observation(np.tile(y, (20, 1)), np.ones((20, 4), bool), 1e-6)
        for mode in NoiseMode:
            x = posterior_sample(point_mass_model, sig, obs, mode, rng)
            assert np.max(np.abs(x - y)) < 1e-3

    def test_unobserved_point_mass(self, point_mass_model, rng):
        sig = calibrate(point_mass_model, np.tile(POINT_MASS, (200, 1)), rng)
        x = posterior_sample(point_mass_model, sig, Observation(np.zeros((500, 4)), np.zeros((500, 4), bool), 1.0),
                             rng=rng)
        assert np.all(np.abs(x.mean(axis=0) - POINT_MASS) < 0.05)

    def test_dimension_mismatch(self, schedule, rng):
        with pytest.raises(ValueError):
            posterior_sample(gaussian_denoiser(schedule, 3), None, Observation.empty(2), rng=rng)

    def test_training_chain_shapes(self, schedule, rng):
        model = gaussian_denoiser(schedule, 2)
        obs = Observation(np.ones((3, 2)), np.ones((3, 2), bool), 0.1)
        x, chain, alt = posterior_sample(model, exact_sigma(schedule, 2), obs, rng=rng, training_chain=True)
        assert chain.shape == alt.shape == (101, 3, 2)
        assert np.array_equal(chain[0], x)
        assert np.array_equal(alt[-1], chain[-1])
        assert not np.array_equal(alt[0], chain[0])

    def test_deterministic(self, schedule):
        model = gaussian_denoiser(schedule, 2)
        obs = Observation([1.0, 0.0], [True, False], 0.2)
        a = posterior_sample(model, exact_sigma(schedule, 2), obs, "sampled", np.random.default_rng(9))
        b = posterior_sample(model, exact_sigma(schedule, 2), obs, "sampled", np.random.default_rng(9))
        assert np.array_equal(a, b)


class TestMixSamplers:
    def test_direct_mix_one_is_unconditional(self, schedule):
        model = gaussian_denoiser(schedule, 3)
        sig = exact_sigma(schedule, 3)
        obs = Observation(np.ones((4, 3)), np.ones((4, 3), bool), 0.1)
        a = posterior_sample_direct_mix(model, sig, obs, 1.0, np.random.default_rng(2))
        b = sample_unconditional(model, sig, np.random.default_rng(2), n=4)
        assert np.array_equal(a, b)

    def test_direct_mix_zero_full_mask(self, schedule, rng):
        y = np.array([0.3, -0.7])
        x = posterior_sample_direct_mix(gaussian_denoiser(schedule, 2), exact_sigma(schedule, 2),
                                        Observation(y, np.ones(2, bool), 0.1), 0.0, rng)
        assert np.array_equal(x, y)

    @pytest.mark.parametrize("fn", [posterior_sample_direct_mix, posterior_sample_noisy_mix])
    def test_mix_range(self, schedule, rng, fn):
        with pytest.raises(ValueError):
            fn(gaussian_denoiser(schedule, 1), None, Observation.empty(1), 1.5, rng)

    def test_noisy_mix_zero_last_step(self, schedule, rng):
        y = np.array([0.3, -0.7])
        x = posterior_sample_noisy_mix(gaussian_denoiser(schedule, 2), exact_sigma(schedule, 2),
                                       Observation(y, np.ones(2, bool), 0.1), 0.0, rng)
        assert np.allclose(x, y)
