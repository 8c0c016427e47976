"""Posterior sampling from a diffusion prior given masked, noisy evidence.

Every reverse step draws an unconditional candidate from the calibrated
kernel, diffuses the observation to the current noise level using the noise
predicted by the denoiser, and fuses the two per observed coordinate by
precision weighting.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .diffusion import noise_from_clean, reverse_kernel
from .errors import ConfigurationError, DegenerateError


class NoiseMode(enum.Enum):
    PREDICTED = "predicted"
    SAMPLED = "sampled"


@dataclass(eq=False)
class Observation:
    """Evidence ``y`` with mask ``mask`` and per-coordinate std ``sigma_obs``.

    Arrays are ``(d,)`` for a single observation or ``(n, d)`` for a batch;
    ``sigma_obs`` broadcasts against ``y``. A zero std marks an exact observation.
    """

    y: np.ndarray
    mask: np.ndarray
    sigma_obs: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != self.y.shape:
            raise ValueError(f"mask shape {self.mask.shape} != observation shape {self.y.shape}")
        self.sigma_obs = np.broadcast_to(np.asarray(self.sigma_obs, dtype=np.float64), self.y.shape)
        observed_std = self.sigma_obs[self.mask]
        if np.any(~(observed_std >= 0)):
            raise ConfigurationError("observation std must be non-negative on observed coordinates")
        self.y = np.where(self.mask, self.y, 0.0)

    @classmethod
    def empty(cls, dim):
        return cls(np.zeros(dim), np.zeros(dim, dtype=bool), np.ones(dim))


def combine_precision(x1, var1, x2, var2):
    """Precision-weighted average; a zero variance wins outright."""
    x1, var1, x2, var2 = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (x1, var1, x2, var2)))
    if np.any((var1 == 0) & (var2 == 0)):
        raise DegenerateError("both Gaussians have zero variance")
    with np.errstate(divide="ignore", invalid="ignore"):
        p1, p2 = 1.0 / var1, 1.0 / var2
        out = (p1 * x1 + p2 * x2) / (p1 + p2)
    out = np.where(var1 == 0, x1, out)
    out = np.where(var2 == 0, x2, out)
    return out


def product_gaussian_combine(mu1, s1, mu2, s2, rng, size=None):
    """Sample from ``N(mu1, s1^2) * N(mu2, s2^2)`` by fusing two independent draws."""
    if np.any(np.asarray(s1) < 0) or np.any(np.asarray(s2) < 0):
        raise ValueError("standard deviations must be non-negative")
    if np.any((np.asarray(s1) == 0) & (np.asarray(s2) == 0)):
        raise DegenerateError("both standard deviations are zero")
    x1 = mu1 + s1 * rng.standard_normal(size)
    x2 = mu2 + s2 * rng.standard_normal(size)
    return combine_precision(x1, np.square(s1), x2, np.square(s2))


def diffused_observation_std(schedule, step, sigma_obs, sigma_hat_next):
    """Std of the observation diffused to ``step`` (from the kernel at ``step + 1``)."""
    ab, ab_next = schedule.alpha_bar[step], schedule.alpha_bar[step + 1]
    gamma = ab_next * (1.0 - ab) / (ab * (1.0 - ab_next))
    return np.sqrt(ab * (np.square(sigma_obs) + gamma * np.square(sigma_hat_next)))


def _fusion_variances(std_x, std_y, mask):
    # an exact observation wins even where the candidate is exact too
    var_x = np.where(mask & (std_y == 0), 1.0, std_x ** 2)
    var_y = np.where(mask, std_y ** 2, 1.0)
    return var_x, var_y


def _as_batch(obs):
    single = obs.y.ndim == 1
    if single:
        return obs.y[None], obs.mask[None], obs.sigma_obs[None], True
    return obs.y, obs.mask, obs.sigma_obs, False


def posterior_sample(model, sigma_hat, obs, noise_mode=NoiseMode.PREDICTED, rng=None,
                     return_chain=False, training_chain=False):
    """Draw ``x0`` from the diffusion prior conditioned on ``obs``.

    ``return_chain`` also returns the whole chain ``x_0..x_L`` stacked as
    ``(L + 1, n, d)``. ``training_chain`` returns, in addition, a second chain
    whose step-``l`` latent is built from ``x_{l+1}`` with freshly sampled
    instead of predicted noise; it is the chain used for loss minimisation
    when training from imperfect data.
    """
    noise_mode = NoiseMode(noise_mode)
    y, mask, sd_obs, single = _as_batch(obs)
    if y.shape[1] != model.dim:
        raise ValueError(f"observation dimension {y.shape[1]} != model dimension {model.dim}")
    schedule = model.schedule
    L = schedule.n_steps
    n, d = y.shape
    any_obs = bool(mask.any())
    x = rng.standard_normal((n, d))
    chain = alt_chain = None
    if return_chain or training_chain:
        chain = np.empty((L + 1, n, d))
        chain[L] = x
    if training_chain:
        alt_chain = np.empty((L + 1, n, d))
        alt_chain[L] = x
    for next_step in range(L, 0, -1):
        step = next_step - 1
        mean, std_x, x0_hat = reverse_kernel(model, x, next_step, sigma_hat)
        cand = mean + std_x * rng.standard_normal((n, d))
        if not any_obs:
            x = cand
            if chain is not None:
                chain[step] = x
                if alt_chain is not None:
                    alt_chain[step] = x
            continue
        if noise_mode is NoiseMode.PREDICTED:
            eps = noise_from_clean(schedule, x, x0_hat, next_step)
        else:
            eps = rng.standard_normal((n, d))
        sh = sigma_hat.row(next_step) if sigma_hat is not None else 0.0
        std_y = diffused_observation_std(schedule, step, sd_obs, sh)
        base = np.sqrt(schedule.alpha_bar[step]) * y
        scale_eps = np.sqrt(1.0 - schedule.alpha_bar[step])
        y_diff = base + scale_eps * eps + std_y * rng.standard_normal((n, d))
        var_x, var_y = _fusion_variances(std_x, std_y, mask)
        new_x = np.where(mask, combine_precision(cand, var_x, np.where(mask, y_diff, 0.0), var_y), cand)
        if alt_chain is not None:
            y_alt = base + scale_eps * rng.standard_normal((n, d)) + std_y * rng.standard_normal((n, d))
            alt_chain[step] = np.where(mask, combine_precision(cand, var_x, np.where(mask, y_alt, 0.0), var_y),
                                       cand)
        x = new_x
        if chain is not None:
            chain[step] = x
    out = x[0] if single else x
    if training_chain:
        return out, chain, alt_chain
    if return_chain:
        return out, chain
    return out


def posterior_sample_direct_mix(model, sigma_hat, obs, mix, rng):
    """Ablation sampler: blend the unconditional candidate directly with ``y``.

    ``mix`` is a scalar or a length-``L`` array indexed by the target step; a
    coefficient of 1 ignores the observation, 0 replaces observed coordinates.
    """
    L = model.schedule.n_steps
    mix = np.broadcast_to(np.asarray(mix, dtype=np.float64), (L,))
    if np.any((mix < 0) | (mix > 1)):
        raise ValueError("mix coefficients must lie in [0, 1]")
    y, mask, _, single = _as_batch(obs)
    n, d = y.shape
    x = rng.standard_normal((n, d))
    for next_step in range(L, 0, -1):
        step = next_step - 1
        mean, std_x, _ = reverse_kernel(model, x, next_step, sigma_hat)
        cand = mean + std_x * rng.standard_normal((n, d))
        x = np.where(mask, mix[step] * cand + (1.0 - mix[step]) * y, cand)
    return x[0] if single else x


def posterior_sample_noisy_mix(model, sigma_hat, obs, mix, rng):
    """Ablation sampler: blend the candidate with a freshly forward-noised ``y``."""
    schedule = model.schedule
    L = schedule.n_steps
    mix = np.broadcast_to(np.asarray(mix, dtype=np.float64), (L,))
    if np.any((mix < 0) | (mix > 1)):
        raise ValueError("mix coefficients must lie in [0, 1]")
    y, mask, _, single = _as_batch(obs)
    n, d = y.shape
    x = rng.standard_normal((n, d))
    for next_step in range(L, 0, -1):
        step = next_step - 1
        mean, std_x, _ = reverse_kernel(model, x, next_step, sigma_hat)
        cand = mean + std_x * rng.standard_normal((n, d))
        ab = schedule.alpha_bar[step]
        y_step = np.sqrt(ab) * y + np.sqrt(1.0 - ab) * rng.standard_normal((n, d))
        x = np.where(mask, mix[step] * cand + (1.0 - mix[step]) * y_step, cand)
    return x[0] if single else x
