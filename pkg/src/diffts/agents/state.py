"""Sufficient statistics of a bandit interaction history."""

import numpy as np

from ..errors import ConfigurationError


class InteractionState:
    """Pull counts and reward sums per (base) arm, plus the assumed noise level."""

    def __init__(self, n_arms, sigma_assumed=0.1):
        if sigma_assumed < 0:
            raise ConfigurationError("assumed noise level must be non-negative")
        self.n_arms = int(n_arms)
        self.sigma_assumed = float(sigma_assumed)
        self.counts = np.zeros(self.n_arms, dtype=np.int64)
        self.sums = np.zeros(self.n_arms)
        self.rounds = 0

    def update(self, arms, rewards):
        arms = np.atleast_1d(np.asarray(arms, dtype=np.int64))
        rewards = np.atleast_1d(np.asarray(rewards, dtype=np.float64))
        np.add.at(self.counts, arms, 1)
        np.add.at(self.sums, arms, rewards)
        self.rounds += 1

    @property
    def pulled(self):
        return self.counts > 0

    @property
    def means(self):
        """Empirical means; NaN where an arm was never pulled."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulled, self.sums / np.maximum(self.counts, 1), np.nan)

    @property
    def adjusted_std(self):
        """``sigma_assumed / sqrt(N_a)``; infinite where ``N_a = 0``."""
        with np.errstate(divide="ignore"):
            return np.where(self.pulled, self.sigma_assumed / np.sqrt(np.maximum(self.counts, 1)), np.inf)

    def observation(self):
        from ..posterior import Observation

        pulled = self.pulled
        return Observation(np.where(pulled, self.means, 0.0), pulled,
                           np.where(pulled, self.adjusted_std, 1.0))
