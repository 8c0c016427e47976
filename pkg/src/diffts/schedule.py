"""Scale-factor ladder of the forward diffusion process."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class DiffusionSchedule:
    """Scale factors ``alpha`` and their running products ``alpha_bar``.

    Both arrays have length ``L + 1`` and are indexed by the diffusion step
    directly. Index 0 holds the convention ``alpha[0] = alpha_bar[0] = 1``,
    so ``alpha_bar[l]`` is the product of ``alpha[1..l]``.
    """

    alpha: np.ndarray
    alpha_bar: np.ndarray
    one_minus_alpha_first: float
    one_minus_alpha_last: float

    @property
    def n_steps(self) -> int:
        return len(self.alpha) - 1

    def sqrt_ab(self, step):
        return np.sqrt(self.alpha_bar[step])

    def sqrt_1m_ab(self, step):
        return np.sqrt(1.0 - self.alpha_bar[step])

    def check_step(self, step, low=1):
        s = np.asarray(step)
        if np.any(s < low) or np.any(s > self.n_steps):
            raise ValueError(f"diffusion step {step} outside [{low}, {self.n_steps}]")

    def reverse_coefficients(self, step):
        """Coefficients of the Gaussian kernel ``x_step | x_{step+1}, x0``.

        Returns ``(c1, c2, v)`` such that the kernel mean is
        ``c1 * x0 + c2 * x_{step+1}`` and its variance is ``v``.
        """
        step = np.asarray(step)
        ab, ab_next = self.alpha_bar[step], self.alpha_bar[step + 1]
        a_next = self.alpha[step + 1]
        c1 = np.sqrt(ab) * (1.0 - a_next) / (1.0 - ab_next)
        c2 = np.sqrt(a_next) * (1.0 - ab) / (1.0 - ab_next)
        v = (1.0 - ab) * (1.0 - a_next) / (1.0 - ab_next)
        return c1, c2, v

    def __repr__(self):
        return (f"DiffusionSchedule(L={self.n_steps}, first={self.one_minus_alpha_first}, "
                f"last={self.one_minus_alpha_last})")


def build_schedule(n_steps=100, one_minus_alpha_first=1e-4, one_minus_alpha_last=0.1):
    """Linear schedule on ``1 - alpha`` between the two given endpoints."""
    if int(n_steps) != n_steps or n_steps < 1:
        raise ConfigurationError(f"number of diffusion steps must be a positive integer, got {n_steps}")
    if not 0.0 < one_minus_alpha_first <= one_minus_alpha_last < 1.0:
        raise ConfigurationError(
            "need 0 < one_minus_alpha_first <= one_minus_alpha_last < 1, got "
            f"{one_minus_alpha_first}, {one_minus_alpha_last}")
    n_steps = int(n_steps)
    betas = np.linspace(one_minus_alpha_first, one_minus_alpha_last, n_steps)
    alpha = np.concatenate([[1.0], 1.0 - betas])
    alpha_bar = np.empty(n_steps + 1)
    alpha_bar[0] = 1.0
    for l in range(1, n_steps + 1):
        alpha_bar[l] = alpha_bar[l - 1] * alpha[l]
    alpha.setflags(write=False)
    alpha_bar.setflags(write=False)
    return DiffusionSchedule(alpha, alpha_bar, float(one_minus_alpha_first), float(one_minus_alpha_last))
