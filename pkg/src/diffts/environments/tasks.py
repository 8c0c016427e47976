"""Bandit tasks, reward simulation and per-round regret."""

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError


class RewardLaw(enum.Enum):
    GAUSSIAN = "gaussian"
    AUCTION = "auction"


@dataclass(eq=False)
class GaussianTask:
    """Multi-armed task with rewards ``mu_a + N(0, noise_std^2)``."""

    mu: np.ndarray
    noise_std: float = 0.1
    law: RewardLaw = field(default=RewardLaw.GAUSSIAN, init=False)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64)
        if self.mu.ndim != 1 or not np.all(np.isfinite(self.mu)):
            raise ConfigurationError("mu must be a finite 1-d array")
        if self.noise_std < 0:
            raise ConfigurationError("noise_std must be non-negative")

    @property
    def n_arms(self):
        return len(self.mu)

    @property
    def combinatorial(self):
        return False

    def best_mean(self):
        return float(self.mu.max())

    def draw(self, arms, rng):
        arms = np.asarray(arms)
        return self.mu[arms] + self.noise_std * rng.standard_normal(arms.shape)


@dataclass(eq=False)
class AuctionTask:
    """Bidding task: bid ``b`` wins w.p. ``win_rates[b]`` and then pays ``payoffs[b]``."""

    win_rates: np.ndarray
    payoffs: np.ndarray
    law: RewardLaw = field(default=RewardLaw.AUCTION, init=False)

    def __post_init__(self):
        self.win_rates = np.asarray(self.win_rates, dtype=np.float64)
        self.payoffs = np.asarray(self.payoffs, dtype=np.float64)
        if self.win_rates.shape != self.payoffs.shape:
            raise ConfigurationError("win_rates and payoffs must have equal shape")
        if np.any((self.win_rates < 0) | (self.win_rates > 1)):
            raise ConfigurationError("win rates must lie in [0, 1]")

    @property
    def mu(self):
        return self.win_rates * self.payoffs

    @property
    def n_arms(self):
        return len(self.win_rates)

    @property
    def combinatorial(self):
        return False

    def best_mean(self):
        return float(self.mu.max())

    def draw(self, arms, rng):
        arms = np.asarray(arms)
        wins = rng.random(arms.shape) < self.win_rates[arms]
        return np.where(wins, self.payoffs[arms], 0.0)


def step(task, action, rng):
    """Play ``action`` on ``task``; returns ``(rewards, regret)``.

    ``action`` is an arm index for ordinary tasks and a sequence of base arm
    indices (a super arm) for combinatorial ones, in which case one reward is
    returned per base arm.
    """
    if task.combinatorial:
        arms = np.asarray(action, dtype=np.int64)
        rewards = task.draw(arms, rng)
        regret = task.best_mean() - float(task.mu[arms].sum())
    else:
        arm = int(action)
        if not 0 <= arm < task.n_arms:
            raise IndexError(f"arm {arm} out of range for {task.n_arms} arms")
        rewards = float(task.draw(np.array([arm]), rng)[0])
        regret = task.best_mean() - float(task.mu[arm])
    return rewards, max(regret, 0.0)


def regret_of(task, action):
    if task.combinatorial:
        return max(task.best_mean() - float(task.mu[np.asarray(action)].sum()), 0.0)
    return max(task.best_mean() - float(task.mu[int(action)]), 0.0)
