"""Per-step, per-coordinate reverse-variance calibration from clean or imperfect data."""

import enum
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .diffusion import forward_sample
from .errors import ConfigurationError, StateError

log = logging.getLogger(__name__)


class CalibrationMode(enum.Enum):
    FULL = "full"
    LAST_STEP_ONLY = "last"
    NONE = "none"


@dataclass(eq=False)
class CalibratedVariances:
    """Residual std ``sigma[l - 1, a]`` of the clean prediction at step ``l``."""

    sigma: np.ndarray
    mode: CalibrationMode = CalibrationMode.FULL

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        self.mode = CalibrationMode(self.mode)
        if self.sigma.ndim != 2:
            raise ConfigurationError("calibrated variances must be an (L, d) array")
        if not np.all(np.isfinite(self.sigma)) or np.any(self.sigma < 0):
            raise ConfigurationError("calibrated std entries must be finite and non-negative")
        if self.mode is CalibrationMode.LAST_STEP_ONLY:
            self.sigma = self.sigma.copy()
            self.sigma[1:] = 0.0
        elif self.mode is CalibrationMode.NONE:
            self.sigma = np.zeros_like(self.sigma)

    @property
    def n_steps(self):
        return self.sigma.shape[0]

    @property
    def dim(self):
        return self.sigma.shape[1]

    def row(self, step):
        if not 1 <= step <= self.n_steps:
            raise StateError(f"no calibration row for diffusion step {step}")
        return self.sigma[step - 1]

    def with_mode(self, mode):
        return CalibratedVariances(self.sigma.copy(), mode)

    @classmethod
    def zeros(cls, n_steps, dim, mode=CalibrationMode.FULL):
        return cls(np.zeros((n_steps, dim)), mode)


def residual_rms(model, x0, step, noise):
    """Coordinate-wise RMS of ``x0 - D(x_step, step)`` for given forward noise."""
    xt, _ = forward_sample(model.schedule, x0, step, None, noise=noise)
    resid = x0 - model.denoise(xt, step)
    return np.sqrt(np.mean(resid ** 2, axis=0))


def calibrate(model, calset, rng, mode=CalibrationMode.FULL):
    """Estimate ``sigma_hat`` with one forward draw per (sample, step)."""
    calset = np.asarray(calset, dtype=np.float64)
    if calset.ndim != 2 or len(calset) == 0:
        raise ConfigurationError("calibration set must be a non-empty (n, d) array")
    L = model.schedule.n_steps
    sigma = np.empty((L, calset.shape[1]))
    for step in range(1, L + 1):
        noise = rng.standard_normal(calset.shape)
        sigma[step - 1] = residual_rms(model, calset, step, noise)
    return CalibratedVariances(sigma, mode)


def calibrate_warm(model, dataset, rng, impute_value=0.5, mode=CalibrationMode.FULL):
    """First-pass calibration that treats the observed values as clean.

    Masked entries are imputed before noising and excluded from the averages;
    a coordinate never observed falls back to the average over the others.
    """
    y = dataset.imputed(impute_value)
    mask = dataset.mask
    counts = mask.sum(axis=0)
    L = model.schedule.n_steps
    sigma = np.empty((L, y.shape[1]))
    for step in range(1, L + 1):
        noise = rng.standard_normal(y.shape)
        xt, _ = forward_sample(model.schedule, y, step, None, noise=noise)
        sq = np.where(mask, (y - model.denoise(xt, step)) ** 2, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            msq = sq.sum(axis=0) / counts
        if np.any(counts == 0):
            msq[counts == 0] = np.mean(msq[counts > 0]) if np.any(counts > 0) else 0.0
        sigma[step - 1] = np.sqrt(msq)
    return CalibratedVariances(sigma, mode)


def calibrate_imperfect(model, calset_deg, rng, warm_sigma, n_iter=1, noise_mode=None,
                        mode=CalibrationMode.FULL):
    """Refine calibration on masked, noisy data via posterior reconstructions.

    Each pass reconstructs ``x0`` by posterior sampling under the current
    estimate, re-noises it to every step, and uses
    ``E|y^a - D^a|^2 - nu_a^2`` as the variance estimate for coordinate ``a``
    (clamped at 0). Coordinates observed in no sample keep their previous value.
    """
    from .posterior import NoiseMode, Observation, posterior_sample

    if len(calset_deg) == 0:
        raise ConfigurationError("calibration set is empty")
    noise_mode = NoiseMode.PREDICTED if noise_mode is None else noise_mode
    y, mask = calset_deg.y, calset_deg.mask
    nu2 = calset_deg.nu_array() ** 2
    counts = mask.sum(axis=0)
    unseen = counts == 0
    if np.any(unseen):
        warnings.warn(f"{int(unseen.sum())} coordinate(s) never observed in the calibration set; "
                      "keeping their previous calibration", RuntimeWarning, stacklevel=2)
    obs = Observation(y, mask, np.sqrt(nu2))
    current = warm_sigma
    L = model.schedule.n_steps
    for _ in range(max(1, int(n_iter))):
        x0_rec = posterior_sample(model, current, obs, noise_mode, rng)
        sigma = np.empty((L, y.shape[1]))
        for step in range(1, L + 1):
            xt, _ = forward_sample(model.schedule, x0_rec, step, rng)
            sq = np.where(mask, (y - model.denoise(xt, step)) ** 2 - nu2, 0.0)
            with np.errstate(invalid="ignore", divide="ignore"):
                est = sq.sum(axis=0) / counts
            est = np.sqrt(np.maximum(est, 0.0))
            est[unseen] = current.sigma[step - 1, unseen]
            sigma[step - 1] = est
        current = CalibratedVariances(sigma, CalibrationMode.FULL)
    return current.with_mode(mode)
