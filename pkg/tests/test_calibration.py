import warnings

import numpy as np
import pytest

from diffts import (CalibratedVariances, CalibrationMode, ConfigurationError, ImperfectDataset, StateError,
                    calibrate, calibrate_imperfect, calibrate_warm, residual_rms)

from conftest import constant_denoiser, gaussian_denoiser


class TestCalibratedVariances:
    def test_last_step_only_mode(self, rng):
        s = CalibratedVariances(rng.random((5, 3)), CalibrationMode.LAST_STEP_ONLY)
        assert np.all(s.sigma[1:] == 0) and np.all(s.sigma[0] > 0)

    def test_none_mode(self, rng):
        assert np.all(CalibratedVariances(rng.random((5, 3)), "none").sigma == 0)

    def test_with_mode_keeps_original(self, rng):
        raw = rng.random((4, 2))
        s = CalibratedVariances(raw)
        assert np.array_equal(s.with_mode("last").sigma[0], raw[0])
        assert np.array_equal(s.sigma, raw)

    @pytest.mark.parametrize("bad", [np.full((2, 2), -1.0), np.full((2, 2), np.nan), np.zeros(3)])
    def test_validation(self, bad):
        with pytest.raises(ConfigurationError):
            CalibratedVariances(bad)

    def test_row_range(self):
        s = CalibratedVariances.zeros(3, 2)
        assert s.row(3).shape == (2,)
        with pytest.raises(StateError):
            s.row(0)


class TestCalibrate:
    def test_oracle_gives_zero(self, schedule, rng):
        x0 = np.tile(rng.standard_normal(4), (20, 1))
        model = constant_denoiser(schedule, x0[0])
        assert np.all(calibrate(model, x0, rng).sigma == 0)

    def test_zero_denoiser_unit_vector(self, schedule, rng):
        e = np.zeros(3)
        e[1] = 1.0
        s = calibrate(constant_denoiser(schedule, np.zeros(3)), e[None], rng)
        assert np.allclose(s.sigma, np.abs(e))

    def test_gaussian_oracle(self, schedule, rng):
        model = gaussian_denoiser(schedule, 8)
        s = calibrate(model, rng.standard_normal((1000, 8)), rng)
        target = 1 - schedule.alpha_bar[1:]
        # isotropic prior: compare the per-step coordinate average
        assert np.all(np.abs((s.sigma ** 2).mean(axis=1) / target - 1) < 0.1)

    def test_permutation_invariant(self, schedule, rng):
        model = gaussian_denoiser(schedule, 3)
        x0 = rng.standard_normal((30, 3))
        noise = rng.standard_normal((30, 3))
        perm = rng.permutation(30)
        a = residual_rms(model, x0, 17, noise)
        b = residual_rms(model, x0[perm], 17, noise[perm])
        assert np.allclose(a, b, rtol=1e-13)

    def test_empty(self, schedule, rng):
        with pytest.raises(ConfigurationError):
            calibrate(constant_denoiser(schedule, np.zeros(2)), np.zeros((0, 2)), rng)


class _Reconstructor:
    """Stub posterior sampler result: tests inject the reconstruction directly."""


class TestCalibrateImperfect:
    def test_noise_correction(self, schedule, rng, monkeypatch):
        # denoiser predicts 0; y observed with constant residual; sq residual 0.05, nu^2 = 0.01
        model = constant_denoiser(schedule, np.zeros(1))
        y = np.full((10, 1), np.sqrt(0.05))
        ds = ImperfectDataset(y, np.ones((10, 1), bool), 0.1)
        warm = CalibratedVariances.zeros(100, 1)
        s = calibrate_imperfect(model, ds, rng, warm)
        assert np.allclose(s.sigma, 0.2)

    def test_clamped_at_zero(self, schedule, rng):
        model = constant_denoiser(schedule, np.zeros(1))
        ds = ImperfectDataset(np.full((5, 1), 0.05), np.ones((5, 1), bool), 0.1)
        s = calibrate_imperfect(model, ds, rng, CalibratedVariances.zeros(100, 1))
        assert np.all(s.sigma == 0)

    def test_unseen_coordinate_keeps_warm_value(self, schedule, rng):
        model = constant_denoiser(schedule, np.zeros(2))
        mask = np.zeros((6, 2), bool)
        mask[:, 0] = True
        ds = ImperfectDataset(np.ones((6, 2)), mask, 0.0)
        warm = CalibratedVariances(np.full((100, 2), 0.7))
        with pytest.warns(RuntimeWarning):
            s = calibrate_imperfect(model, ds, rng, warm)
        assert np.all(s.sigma[:, 1] == 0.7)
        assert np.allclose(s.sigma[:, 0], 1.0)

    def test_noiseless_full_mask_matches_clean(self, schedule):
        # with nu = 0 and full masks the exact reconstruction is y itself
        model = gaussian_denoiser(schedule, 3)
        x0 = np.random.default_rng(0).standard_normal((200, 3))
        ds = ImperfectDataset(x0, np.ones_like(x0, bool), 0.0)
        s = calibrate_imperfect(model, ds, np.random.default_rng(1), CalibratedVariances.zeros(100, 3))
        ref = calibrate(model, x0, np.random.default_rng(2))
        assert np.allclose(np.median(s.sigma / np.maximum(ref.sigma, 1e-12), axis=1), 1, atol=0.25)

    def test_warm_excludes_masked(self, schedule, rng):
        model = constant_denoiser(schedule, np.zeros(2))
        y = np.array([[1.0, 5.0], [1.0, 0.0]])
        mask = np.array([[True, False], [True, True]])
        s = calibrate_warm(model, ImperfectDataset(y, mask, 0.0), rng)
        assert np.allclose(s.sigma[:, 0], 1.0)
        assert np.allclose(s.sigma[:, 1], 0.0)

    def test_mode_applied(self, schedule, rng):
        model = constant_denoiser(schedule, np.zeros(1))
        ds = ImperfectDataset(np.ones((3, 1)), np.ones((3, 1), bool), 0.0)
        s = calibrate_imperfect(model, ds, rng, CalibratedVariances.zeros(100, 1), mode="last")
        assert s.sigma[0, 0] == pytest.approx(1.0) and np.all(s.sigma[1:] == 0)
