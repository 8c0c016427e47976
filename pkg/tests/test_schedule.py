import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffts import ConfigurationError, build_schedule


class TestBuildSchedule:
    def test_endpoints(self, schedule):
        assert schedule.n_steps == 100
        assert np.isclose(1 - schedule.alpha[1], 1e-4)
        assert np.isclose(1 - schedule.alpha[100], 0.1)

    def test_single_step(self):
        s = build_schedule(1, 0.5, 0.5)
        assert s.alpha_bar[1] == 0.5

    def test_terminal_alpha_bar_small(self, schedule):
        assert schedule.alpha_bar[100] == pytest.approx(np.prod(1 - np.linspace(1e-4, 0.1, 100)))
        assert schedule.alpha_bar[100] < 0.01

    def test_linear_in_one_minus_alpha(self, schedule):
        d = np.diff(1 - schedule.alpha[1:])
        assert np.allclose(d, d[0])

    @pytest.mark.parametrize("args", [(0, 1e-4, 0.1), (10, 0.0, 0.1), (10, 0.2, 0.1), (10, 1e-4, 1.0)])
    def test_bad_bounds(self, args):
        with pytest.raises(ConfigurationError):
            build_schedule(*args)


class TestScheduleInvariants:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 300), st.floats(1e-5, 0.5), st.floats(0.0, 0.49))
    def test_product_identity_and_monotone(self, L, first, extra):
        s = build_schedule(L, first, min(first + extra, 0.99))
        assert s.alpha_bar[0] == 1.0
        for l in range(1, L + 1):
            assert s.alpha_bar[l] == s.alpha_bar[l - 1] * s.alpha[l]
        assert np.all(np.diff(s.alpha_bar) < 0)
        assert np.all((s.alpha[1:] > 0) & (s.alpha[1:] < 1))

    def test_step_zero_kernel_collapses(self, schedule):
        c1, c2, v = schedule.reverse_coefficients(0)
        assert c1 == pytest.approx(1.0) and c2 == 0.0 and v == 0.0

    def test_noiseless_trajectory_fixed(self, schedule, rng):
        x0 = rng.standard_normal(5)
        for l in range(schedule.n_steps):
            c1, c2, _ = schedule.reverse_coefficients(l)
            mean = c1 * x0 + c2 * np.sqrt(schedule.alpha_bar[l + 1]) * x0
            assert np.allclose(mean, np.sqrt(schedule.alpha_bar[l]) * x0, rtol=1e-12, atol=1e-14)

    def test_kernel_matches_bayes_oracle(self):
        # alpha_{l+1}=0.9, ab_l=0.5, ab_{l+1}=0.45; brute-force 1-d Gaussian conditioning
        a_next, ab, ab_next = 0.9, 0.5, 0.45
        c1 = np.sqrt(ab) * (1 - a_next) / (1 - ab_next)
        c2 = np.sqrt(a_next) * (1 - ab) / (1 - ab_next)
        v = (1 - ab) * (1 - a_next) / (1 - ab_next)
        x0, x_next = 0.7, -0.3
        # x_l | x0 ~ N(sqrt(ab) x0, 1-ab); x_next | x_l ~ N(sqrt(a_next) x_l, 1-a_next)
        grid = np.linspace(-8, 8, 400001)
        logp = (-(grid - np.sqrt(ab) * x0) ** 2 / (2 * (1 - ab))
                - (x_next - np.sqrt(a_next) * grid) ** 2 / (2 * (1 - a_next)))
        w = np.exp(logp - logp.max())
        w /= w.sum()
        mean = np.sum(w * grid)
        var = np.sum(w * (grid - mean) ** 2)
        assert mean == pytest.approx(c1 * x0 + c2 * x_next, abs=1e-6)
        assert var == pytest.approx(v, rel=1e-4)
        assert c1 == pytest.approx(np.sqrt(0.5) * 0.1 / 0.55)
        assert c2 == pytest.approx(np.sqrt(0.9) * 0.5 / 0.55)
        assert v == pytest.approx(0.5 * 0.1 / 0.55)
