"""Denoiser model, forward noising, reverse steps, sampling and clean-data training.

Functions taking a ``model`` only rely on ``model.schedule``, ``model.dim`` and
``model.denoise(x, steps)``, so analytic denoisers can be plugged in wherever a
trained network is expected.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, StateError, TrainingError
from .network import MLP, Adam, step_embedding

log = logging.getLogger(__name__)


class TargetMode(enum.Enum):
    CLEAN = "clean"
    NOISE = "noise"


def _steps_array(steps, n):
    steps = np.asarray(steps, dtype=np.int64)
    if steps.ndim == 0:
        steps = np.full(n, int(steps))
    return steps


class DenoiserModel:
    """MLP denoiser ``D(x, step)`` bound to its diffusion schedule.

    The network sees ``x`` concatenated with a sinusoidal step embedding. In
    ``TargetMode.CLEAN`` its output is the clean prediction; in
    ``TargetMode.NOISE`` the output is the predicted noise and the clean
    prediction is recovered by inverting the forward map.
    """

    def __init__(self, dim, schedule, hidden=(256, 256, 256), emb_dim=32,
                 target=TargetMode.CLEAN, params=None, seed=0):
        self.dim = int(dim)
        self.schedule = schedule
        self.emb_dim = int(emb_dim)
        self.target = TargetMode(target)
        self.net = MLP(self.dim + self.emb_dim, hidden, self.dim, params=params, rng=seed)

    @property
    def hidden(self):
        return self.net.widths

    @property
    def params(self):
        return self.net.params

    def copy(self):
        return DenoiserModel(self.dim, self.schedule, self.hidden, self.emb_dim,
                             self.target, params=self.params.copy())

    def _inputs(self, x, steps):
        return np.concatenate([x, step_embedding(steps, self.emb_dim)], axis=1)

    def _as_batch(self, x, steps):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None, :] if single else x
        st = _steps_array(steps, len(x2))
        self.schedule.check_step(st)
        return x2, st, single

    def network_output(self, x, steps):
        x2, st, single = self._as_batch(x, steps)
        out = self.net.forward(self._inputs(x2, st))
        return out[0] if single else out

    def _clean_from_output(self, x, out, steps):
        if self.target is TargetMode.CLEAN:
            return out
        a = self.schedule.sqrt_ab(steps)[:, None]
        s = self.schedule.sqrt_1m_ab(steps)[:, None]
        return (x - s * out) / a

    def denoise(self, x, steps):
        """Clean prediction ``D(x, step)``; ``x`` is ``(d,)`` or ``(n, d)``."""
        x2, st, single = self._as_batch(x, steps)
        out = self.net.forward(self._inputs(x2, st))
        clean = self._clean_from_output(x2, out, st)
        return clean[0] if single else clean

    def predicted_noise(self, x, steps):
        x2, st, single = self._as_batch(x, steps)
        out = self.net.forward(self._inputs(x2, st))
        if self.target is TargetMode.NOISE:
            eps = out
        else:
            eps = noise_from_clean(self.schedule, x2, out, st)
        return eps[0] if single else eps

    def denoise_with_backward(self, x, steps):
        """Clean prediction plus a closure mapping ``dLoss/dD`` to ``dLoss/dtheta``."""
        x2, st, _ = self._as_batch(x, steps)
        out, cache = self.net.forward(self._inputs(x2, st), keep=True)
        clean = self._clean_from_output(x2, out, st)
        if self.target is TargetMode.CLEAN:
            scale = None
        else:
            scale = -(self.schedule.sqrt_1m_ab(st) / self.schedule.sqrt_ab(st))[:, None]

        def backward(grad_clean):
            g = grad_clean if scale is None else grad_clean * scale
            return self.net.backward(cache, g)

        return clean, backward

    def output_with_backward(self, x, steps):
        x2, st, _ = self._as_batch(x, steps)
        out, cache = self.net.forward(self._inputs(x2, st), keep=True)
        return out, (lambda g: self.net.backward(cache, g))

    def __repr__(self):
        return (f"DenoiserModel(dim={self.dim}, hidden={self.hidden}, emb_dim={self.emb_dim}, "
                f"target={self.target.value}, {self.schedule!r})")


def noise_from_clean(schedule, x, clean, steps):
    steps = np.asarray(steps)
    a = schedule.sqrt_ab(steps)
    s = schedule.sqrt_1m_ab(steps)
    if steps.ndim:
        a, s = a[:, None], s[:, None]
    return (x - a * clean) / s


def clean_from_noise(schedule, x, eps, steps):
    steps = np.asarray(steps)
    a = schedule.sqrt_ab(steps)
    s = schedule.sqrt_1m_ab(steps)
    if steps.ndim:
        a, s = a[:, None], s[:, None]
    return (x - s * eps) / a


def predicted_noise(model, x, step):
    """Noise implied by the model's clean prediction at ``x`` (step >= 1)."""
    step_arr = np.asarray(step)
    if np.any(step_arr < 1):
        raise ValueError("predicted noise is undefined at step 0")
    if hasattr(model, "predicted_noise"):
        return model.predicted_noise(x, step)
    x = np.asarray(x, dtype=np.float64)
    return noise_from_clean(model.schedule, x, model.denoise(x, step), step)


def forward_sample(schedule, x0, step, rng, noise=None):
    """Draw ``x_step ~ N(sqrt(ab) x0, (1 - ab) I)``; returns ``(x_step, noise)``.

    ``step`` may be 0 (identity) or an integer array with one step per row.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    schedule.check_step(step, low=0)
    if noise is None:
        noise = rng.standard_normal(x0.shape)
    step = np.asarray(step)
    a = schedule.sqrt_ab(step)
    s = schedule.sqrt_1m_ab(step)
    if step.ndim:
        a, s = a[:, None], s[:, None]
    return a * x0 + s * noise, noise


def reverse_kernel(model, x_next, next_step, sigma_hat=None):
    """Mean, per-coordinate std and clean prediction of ``x_{next_step-1} | x_next``.

    ``sigma_hat`` is a ``CalibratedVariances`` (or ``None`` for the plain
    kernel); the calibrated variance is ``v + c1**2 * sigma_hat**2``.
    """
    x_next = np.asarray(x_next, dtype=np.float64)
    step = next_step - 1
    model.schedule.check_step(next_step)
    x0_hat = model.denoise(x_next, next_step)
    c1, c2, v = model.schedule.reverse_coefficients(step)
    mean = c1 * x0_hat + c2 * x_next
    if sigma_hat is None:
        var = np.full_like(mean, v)
    else:
        row = sigma_hat.row(next_step)
        var = v + c1 ** 2 * row ** 2 + np.zeros_like(mean)
    return mean, np.sqrt(var), x0_hat


def reverse_step_plain(model, x_next, next_step, rng):
    """One uncalibrated reverse step from ``x_next`` (at ``next_step``) to ``next_step - 1``."""
    mean, std, _ = reverse_kernel(model, x_next, next_step)
    return mean + std * rng.standard_normal(mean.shape)


def reverse_step_calibrated(model, sigma_hat, x_next, next_step, rng):
    """Calibrated reverse step; returns ``(sample, std)``."""
    if sigma_hat is None:
        raise StateError("calibrated reverse step requires calibrated variances")
    mean, std, _ = reverse_kernel(model, x_next, next_step, sigma_hat)
    return mean + std * rng.standard_normal(mean.shape), std


def sample_unconditional(model, sigma_hat, rng, n=None, plain=False):
    """Draw from the generative distribution: start at N(0, I), run all reverse steps.

    With ``plain=True`` (or ``sigma_hat=None``) the uncalibrated kernel is used.
    Returns ``(d,)`` when ``n`` is None, else ``(n, d)``.
    """
    shape = (1 if n is None else n, model.dim)
    x = rng.standard_normal(shape)
    calib = None if plain else sigma_hat
    for next_step in range(model.schedule.n_steps, 0, -1):
        mean, std, _ = reverse_kernel(model, x, next_step, calib)
        x = mean + std * rng.standard_normal(shape)
    return x[0] if n is None else x


@dataclass
class TrainConfig:
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.99
    batch_size: int = 128
    steps: int = 15000
    seed: int = 0
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not self.lr > 0:
            raise ConfigurationError(f"learning rate must be positive, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigurationError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")
        if self.batch_size < 1 or self.steps < 0:
            raise ConfigurationError("batch size must be >= 1 and steps >= 0")


def make_optimizer(model, config):
    return Adam(model.params.size, config.lr, config.beta1, config.beta2, config.adam_eps)


def run_steps(model, optimizer, n_steps, batch_loss, rng, history=None, phase="train", offset=0):
    """Generic minimisation loop: ``batch_loss(rng) -> (loss, grad)``."""
    for i in range(n_steps):
        loss, grad = batch_loss(rng)
        if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise TrainingError(f"non-finite loss in phase {phase!r} at step {offset + i}",
                                step=offset + i, phase=phase)
        optimizer.step(model.params, grad)
        if history is not None:
            history.append(float(loss))


def denoising_batch_loss(model, x0, steps, noise):
    """Per-batch mean of the denoising loss and its parameter gradient.

    For clean-target models the loss is ``||x0 - D(x_l, l)||^2``; for
    noise-target models the equivalent ``||noise - eps_theta(x_l, l)||^2``.
    """
    xt, _ = forward_sample(model.schedule, x0, steps, None, noise=noise)
    b = len(x0)
    if model.target is TargetMode.CLEAN:
        pred, backward = model.denoise_with_backward(xt, steps)
        resid = pred - x0
    else:
        pred, backward = model.output_with_backward(xt, steps)
        resid = pred - noise
    loss = np.sum(resid ** 2) / b
    return loss, backward(2.0 * resid / b)


def draw_batch(rng, n_rows, batch_size, n_steps, dim):
    """Batch indices, diffusion steps and forward noise, in a fixed draw order."""
    idx = rng.integers(0, n_rows, size=batch_size)
    steps = rng.integers(1, n_steps + 1, size=batch_size)
    noise = rng.standard_normal((batch_size, dim))
    return idx, steps, noise


def training_rng(seed):
    # separate stream from the one used for parameter initialisation
    return np.random.default_rng([int(seed), 1])


def train_denoiser(data, schedule, config=None, model=None, history=None, **model_kw):
    """Fit a denoiser to clean vectors with the standard denoising objective and Adam."""
    config = config or TrainConfig()
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or len(data) == 0:
        raise ConfigurationError("training set must be a non-empty (n, d) array")
    if not np.all(np.isfinite(data)):
        raise ConfigurationError("training set contains non-finite values")
    if model is None:
        model = DenoiserModel(data.shape[1], schedule, seed=config.seed, **model_kw)
    elif model.dim != data.shape[1]:
        raise ConfigurationError(f"model dimension {model.dim} != data dimension {data.shape[1]}")
    rng = training_rng(config.seed)
    opt = make_optimizer(model, config)

    def batch_loss(rng):
        idx, steps, noise = draw_batch(rng, len(data), config.batch_size, schedule.n_steps, model.dim)
        return denoising_batch_loss(model, data[idx], steps, noise)

    run_steps(model, opt, config.steps, batch_loss, rng, history)
    return model
