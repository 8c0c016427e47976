"""Arm-selection rules and the policy objects the evaluation loop drives.

A policy maps the interaction state to an action: an arm index for ordinary
tasks, or a list of base-arm indices (a path) when constructed with a
``SuperArmStructure``. Ties in every argmax go to the lowest index.
"""

import numpy as np

from ..environments.maze import covering_super_arms, shortest_path
from ..posterior import NoiseMode, posterior_sample
from .gaussian import gaussian_posterior_sample
from .gmm import gmm_posterior_sample


def diffts_sample(model, sigma_hat, state, noise_mode, rng):
    """One posterior draw of the mean-reward vector given the interaction state."""
    if model.dim != state.n_arms:
        raise ValueError(f"model dimension {model.dim} != number of arms {state.n_arms}")
    return posterior_sample(model, sigma_hat, state.observation(), noise_mode, rng)


def diffts_select(model, sigma_hat, state, noise_mode=NoiseMode.PREDICTED, rng=None):
    return int(np.argmax(diffts_sample(model, sigma_hat, state, noise_mode, rng)))


def ucb_indices(state):
    """``mu_hat + sigma_assumed / sqrt(N)``; ``+inf`` for unpulled arms."""
    with np.errstate(invalid="ignore"):
        return np.where(state.pulled, state.means + state.adjusted_std, np.inf)


def ucb1_select(state, t=None):
    """UCB index argmax; an unpulled arm (the lowest-index one) is returned first."""
    unpulled = np.flatnonzero(~state.pulled)
    if len(unpulled):
        return int(unpulled[0])
    return int(np.argmax(ucb_indices(state)))


def combinatorial_select(values, structure):
    """Best path for per-edge values: Dijkstra on ``max(0, -value)``."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("edge values must be finite")
    return shortest_path(structure, np.maximum(0.0, -values))


class Policy:
    name = "policy"
    sigma_assumed = 0.1

    def __init__(self, structure=None, name=None, sigma_assumed=None):
        self.structure = structure
        if name is not None:
            self.name = name
        if sigma_assumed is not None:
            self.sigma_assumed = float(sigma_assumed)

    def reset(self, task):
        self.task = task

    def values(self, state, rng):
        raise NotImplementedError

    def select(self, state, rng):
        v = self.values(state, rng)
        if self.structure is not None:
            return combinatorial_select(v, self.structure)
        return int(np.argmax(v))


class DiffTSPolicy(Policy):
    name = "diffts"

    def __init__(self, model, sigma_hat, noise_mode=NoiseMode.PREDICTED, **kw):
        super().__init__(**kw)
        self.model, self.sigma_hat, self.noise_mode = model, sigma_hat, NoiseMode(noise_mode)

    def values(self, state, rng):
        return diffts_sample(self.model, self.sigma_hat, state, self.noise_mode, rng)


class UCB1Policy(Policy):
    """UCB with the radius ``sigma_assumed / sqrt(N)`` after an initialisation phase.

    Ordinary tasks pull every arm once; combinatorial tasks play covering
    super arms until every base arm has been observed.
    """

    name = "ucb1"

    def select(self, state, rng):
        if self.structure is None:
            return ucb1_select(state)
        pulled = state.pulled
        if not np.all(pulled):
            for path in covering_super_arms(self.structure):
                if not np.all(pulled[path]):
                    return path
        return combinatorial_select(ucb_indices(state), self.structure)


class GaussianTSPolicy(Policy):
    name = "gts"

    def __init__(self, prior, **kw):
        super().__init__(**kw)
        self.prior = prior

    def values(self, state, rng):
        return gaussian_posterior_sample(self.prior, state, rng)


class GmmTSPolicy(Policy):
    name = "gmm_ts"

    def __init__(self, prior, **kw):
        super().__init__(**kw)
        self.prior = prior

    def values(self, state, rng):
        return gmm_posterior_sample(self.prior, state, rng)


class OraclePolicy(Policy):
    """Plays the true best action of the current task."""

    name = "oracle"

    def select(self, state, rng):
        if self.structure is not None:
            return self.task.optimal_path()
        return int(np.argmax(self.task.mu))


class RandomPolicy(Policy):
    """Uniform arm; for paths, the shortest path under uniform random weights."""

    name = "random"

    def values(self, state, rng):
        return -rng.random(state.n_arms) if self.structure is not None else rng.random(state.n_arms)

    def select(self, state, rng):
        if self.structure is None:
            return int(rng.integers(state.n_arms))
        return super().select(state, rng)
