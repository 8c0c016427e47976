"""Training a diffusion prior from masked, noisy data.

A warm-up phase fits the denoiser on forward-noised, imputed observations.
Each subsequent repeat recalibrates the model, reconstructs full diffusion
chains for every training row by posterior sampling, then minimises a
masked loss with a SURE-style divergence penalty on those chains.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .calibration import calibrate_imperfect, calibrate_warm
from .diffusion import (DenoiserModel, TrainConfig, denoising_batch_loss, draw_batch,
                        forward_sample, make_optimizer, run_steps, training_rng)
from .errors import ConfigurationError
from .posterior import NoiseMode, Observation, posterior_sample

log = logging.getLogger(__name__)


def sure_divergence_term(model, x, step, eps, rng, probe=None):
    """Monte-Carlo divergence estimate ``b.(D(x + eps b) - D(x)) / eps``, ``b ~ N(0, I)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=np.float64)
    b = rng.standard_normal(x.shape) if probe is None else probe
    diff = model.denoise(x + eps * b, step) - model.denoise(x, step)
    return np.sum(b * diff, axis=-1) / eps


def _weights(nu, delta):
    nu = np.asarray(nu, dtype=np.float64)
    with np.errstate(divide="ignore"):
        w = 1.0 / (nu ** 2 + delta)
    return np.where(np.isinf(nu), 0.0, w)


def batch_imperfect_loss(model, y, mask, x_tilde, steps, lam, nu, eps, rng,
                         weighted=False, delta=0.0, squared=False):
    """Batch-mean imperfect loss and its parameter gradient.

    Unweighted: ``||m*(y - D)||^2 + 2 lam sqrt(ab) sum_a nu_a^2 b_a (D+ - D)_a / eps``.
    Weighted: ``sum_a m_a |y_a - D_a| / (nu_a^2 + delta) + 2 lam sqrt(ab) b.(D+ - D) / eps``
    (with ``squared`` the residual is squared). Probes ``b`` are only drawn
    when the penalty is active.
    """
    B, d = y.shape
    steps = np.asarray(steps)
    nu = np.broadcast_to(np.asarray(nu, dtype=np.float64), (B, d))
    m = mask.astype(np.float64)
    if weighted:
        pen_w = np.ones((B, d))
    else:
        pen_w = nu ** 2
    sqrt_ab = model.schedule.sqrt_ab(steps)[:, None]
    coef = 2.0 * lam * sqrt_ab * pen_w
    use_pen = lam != 0 and np.any(coef != 0)
    if use_pen:
        b = rng.standard_normal((B, d))
        xin = np.concatenate([x_tilde, x_tilde + eps * b])
        st = np.concatenate([steps, steps])
    else:
        xin, st = x_tilde, steps
    out, backward = model.denoise_with_backward(xin, st)
    D = out[:B]
    r = y - D
    if weighted:
        w = m * _weights(nu, delta)
        if squared:
            data = np.sum(w * r ** 2)
            g_D = -2.0 * w * r
        else:
            data = np.sum(w * np.abs(r))
            g_D = -w * np.sign(r)
    else:
        data = np.sum(m * r ** 2)
        g_D = -2.0 * m * r
    grad_out = np.empty_like(out)
    if use_pen:
        Dp = out[B:]
        pen = np.sum(coef * b * (Dp - D)) / eps
        grad_out[:B] = (g_D - coef * b / eps) / B
        grad_out[B:] = coef * b / eps / B
    else:
        pen = 0.0
        grad_out[:] = g_D / B
    loss = (data + pen) / B
    return loss, backward(grad_out)


def _single(model, y, mask, x_tilde, step):
    y = np.asarray(y, dtype=np.float64)[None]
    return (y, np.asarray(mask, dtype=bool)[None], np.asarray(x_tilde, dtype=np.float64)[None],
            np.array([int(step)]))


def imperfect_loss(model, y, mask, x_tilde, step, lam, nu, eps, rng):
    """Masked squared error plus the SURE divergence penalty for one sample."""
    y, mask, x_tilde, steps = _single(model, y, mask, x_tilde, step)
    loss, _ = batch_imperfect_loss(model, y, mask, x_tilde, steps, lam, nu, eps, rng)
    return loss


def imperfect_loss_weighted(model, y, mask, nu, x_tilde, step, lam, delta, eps, rng, squared=False):
    """Inverse-variance weighted residual plus the divergence penalty for one sample."""
    y, mask, x_tilde, steps = _single(model, y, mask, x_tilde, step)
    loss, _ = batch_imperfect_loss(model, y, mask, x_tilde, steps, lam, nu, eps, rng,
                                   weighted=True, delta=delta, squared=squared)
    return loss


@dataclass
class ImperfectTrainConfig:
    lam: float = 0.1
    sure_eps: float = 1e-5
    warmup_steps: int = 15000
    n_outer: int = 3
    n_inner: int = 3000
    impute_value: float = 0.5
    delta_floor: float = 0.0
    weighted: bool = False
    squared_weighted: bool = False
    # optional lambda per phase: index 0 is the warm-up, index r the r-th repeat
    lambda_schedule: Optional[Sequence[float]] = None
    final_clean_steps: int = 0
    calib_iters: int = 1
    chain_batch: int = 512
    chain_cache_dir: Optional[str] = None
    base: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.lam < 0 or not self.sure_eps > 0 or self.delta_floor < 0:
            raise ConfigurationError("need lam >= 0, sure_eps > 0 and delta_floor >= 0")
        for name in ("warmup_steps", "n_outer", "n_inner", "final_clean_steps"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if self.lambda_schedule is not None and len(self.lambda_schedule) < self.n_outer + 1:
            raise ConfigurationError("lambda_schedule needs one entry per phase (warm-up + repeats)")

    @property
    def total_steps(self):
        return self.warmup_steps + self.n_outer * self.n_inner + self.final_clean_steps

    def lam_for(self, phase):
        if self.lambda_schedule is None:
            return self.lam
        return float(self.lambda_schedule[phase])


@dataclass
class ImperfectTrainResult:
    model: DenoiserModel
    sigma: object
    history: list
    reconstructions: Optional[np.ndarray] = None


def build_training_chains(model, sigma, dataset, rng, batch=512):
    """Posterior chains for every row (fresh noise in the diffused observation).

    Returns ``(x0, chains)`` with chains shaped ``(L + 1, n, d)``.
    """
    n, d = dataset.y.shape
    L = model.schedule.n_steps
    chains = np.empty((L + 1, n, d))
    x0 = np.empty((n, d))
    nu = dataset.nu_array()
    for start in range(0, n, batch):
        sl = slice(start, min(n, start + batch))
        obs = Observation(dataset.y[sl], dataset.mask[sl], nu[sl])
        out, _, alt = posterior_sample(model, sigma, obs, NoiseMode.PREDICTED, rng, training_chain=True)
        chains[:, sl] = alt
        x0[sl] = out
    return x0, chains


def train_imperfect(dataset, calset, schedule, config=None, model=None, history=None, **model_kw):
    """Warm-up plus EM-style alternation of posterior sampling and loss minimisation.

    Returns an :class:`ImperfectTrainResult` with the final model and calibration.
    """
    from .io import ChainCache

    config = config or ImperfectTrainConfig()
    if len(dataset) == 0 or len(calset) == 0:
        raise ConfigurationError("training and calibration sets must be non-empty")
    base = config.base
    if model is None:
        model = DenoiserModel(dataset.dim, schedule, seed=base.seed, **model_kw)
    history = [] if history is None else history
    rng = training_rng(base.seed)
    opt = make_optimizer(model, base)
    y, mask = dataset.y, dataset.mask
    nu = dataset.nu_array()
    imputed = dataset.imputed(config.impute_value)
    L, d = schedule.n_steps, dataset.dim
    common = dict(eps=config.sure_eps, weighted=config.weighted, delta=config.delta_floor,
                  squared=config.squared_weighted)

    lam0 = config.lam_for(0)

    def warm_loss(rng):
        idx, steps, noise = draw_batch(rng, len(y), base.batch_size, L, d)
        xt, _ = forward_sample(schedule, imputed[idx], steps, None, noise=noise)
        return batch_imperfect_loss(model, y[idx], mask[idx], xt, steps, lam0, nu[idx], rng=rng, **common)

    log.info("warm-up: %d steps", config.warmup_steps)
    run_steps(model, opt, config.warmup_steps, warm_loss, rng, history, phase="warmup")

    cache = ChainCache(config.chain_cache_dir) if config.chain_cache_dir else None
    recon = None
    done = config.warmup_steps
    for rep in range(1, config.n_outer + 1):
        sigma = _calibrate(model, calset, rng, config)
        recon, chains = build_training_chains(model, sigma, dataset, rng, config.chain_batch)
        if cache is not None:
            cache.save(rep - 1, np.swapaxes(chains, 0, 1))
        lam_r = config.lam_for(rep)

        def em_loss(rng, chains=chains, lam_r=lam_r):
            idx = rng.integers(0, len(y), size=base.batch_size)
            steps = rng.integers(1, L + 1, size=base.batch_size)
            xt = chains[steps, idx]
            return batch_imperfect_loss(model, y[idx], mask[idx], xt, steps, lam_r, nu[idx], rng=rng, **common)

        log.info("repeat %d/%d: %d steps", rep, config.n_outer, config.n_inner)
        run_steps(model, opt, config.n_inner, em_loss, rng, history, phase=f"repeat-{rep}", offset=done)
        done += config.n_inner
        del chains

    if config.final_clean_steps:
        if recon is None:
            sigma = _calibrate(model, calset, rng, config)
            recon, _ = build_training_chains(model, sigma, dataset, rng, config.chain_batch)

        def clean_loss(rng, recon=recon):
            idx, steps, noise = draw_batch(rng, len(recon), base.batch_size, L, d)
            return denoising_batch_loss(model, recon[idx], steps, noise)

        run_steps(model, opt, config.final_clean_steps, clean_loss, rng, history,
                  phase="final-clean", offset=done)

    sigma = _calibrate(model, calset, rng, config)
    return ImperfectTrainResult(model, sigma, history, recon)


def _calibrate(model, calset, rng, config):
    warm = calibrate_warm(model, calset, rng, config.impute_value)
    return calibrate_imperfect(model, calset, rng, warm, n_iter=config.calib_iters)
