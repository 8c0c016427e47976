"""Task distributions for the vanilla multi-armed problems and the toy dataset."""

from dataclasses import dataclass

import numpy as np

from ..data import ImperfectDataset
from ..errors import ConfigurationError
from .tasks import GaussianTask


@dataclass(frozen=True)
class PopularNicheConfig:
    n_groups: int = 40
    group_size: int = 5
    n_popular_groups: int = 20
    niche_range: tuple = (1, 3)
    popular_range: tuple = (15, 17)
    niche_prob: float = 0.7
    popular_value: float = 0.8
    popular_cap: float = 0.95
    perturb_std: float = 0.1

    @property
    def n_arms(self):
        return self.n_groups * self.group_size


POPULAR_NICHE_DESK = PopularNicheConfig(n_groups=10, n_popular_groups=5, niche_range=(1, 2),
                                        popular_range=(3, 4))


def popular_niche_mean(rng, config=PopularNicheConfig()):
    """Mean-reward vector: groups ``[0, n_popular)`` are popular, the rest niche."""
    c = config
    n_niche = c.n_groups - c.n_popular_groups
    mu_bar = np.zeros((c.n_groups, c.group_size))
    k_niche = rng.integers(c.niche_range[0], c.niche_range[1] + 1)
    niche = c.n_popular_groups + rng.choice(n_niche, size=k_niche, replace=False)
    mu_bar[niche] = (rng.random((k_niche, c.group_size)) < c.niche_prob).astype(np.float64)
    k_pop = rng.integers(c.popular_range[0], c.popular_range[1] + 1)
    popular = rng.choice(c.n_popular_groups, size=k_pop, replace=False)
    mu_bar[popular] = c.popular_value
    mu = mu_bar + c.perturb_std * rng.standard_normal(mu_bar.shape)
    mu[:c.n_popular_groups] = np.minimum(mu[:c.n_popular_groups], c.popular_cap)
    return np.clip(mu, 0.0, 1.0).reshape(-1)


def gen_popular_niche(rng, config=PopularNicheConfig(), noise_std=0.1):
    return GaussianTask(popular_niche_mean(rng, config), noise_std)


class LabeledArmsDistribution:
    """Arms carry fixed label sets drawn once; each task draws its own label set."""

    def __init__(self, rng, n_arms=500, n_labels=50, set_size=7, perturb_std=0.1):
        if set_size > n_labels:
            raise ConfigurationError("set_size cannot exceed n_labels")
        self.n_arms, self.n_labels, self.set_size = n_arms, n_labels, set_size
        self.perturb_std = perturb_std
        self.arm_labels = np.zeros((n_arms, n_labels), dtype=bool)
        for a in range(n_arms):
            self.arm_labels[a, rng.choice(n_labels, size=set_size, replace=False)] = True

    def base_mean(self, task_labels):
        inter = self.arm_labels[:, task_labels].sum(axis=1)
        return 1.0 - 0.25 ** inter

    def mean(self, rng):
        labels = rng.choice(self.n_labels, size=self.set_size, replace=False)
        mu = self.base_mean(labels) + self.perturb_std * rng.standard_normal(self.n_arms)
        span = mu.max() - mu.min()
        return (mu - mu.min()) / span if span > 0 else np.zeros_like(mu)


def gen_labeled_arms(rng, distribution, noise_std=0.1):
    return GaussianTask(distribution.mean(rng), noise_std)


def gen_toy_groups(rng, n_groups=20, group_size=10, max_active=6):
    """Binary vector with 0..max_active randomly chosen groups switched on."""
    k = rng.integers(0, max_active + 1)
    x = np.zeros((n_groups, group_size))
    x[rng.choice(n_groups, size=k, replace=False)] = 1.0
    return x.reshape(-1)


def toy_groups_dataset(rng, n, **kw):
    return np.stack([gen_toy_groups(rng, **kw) for _ in range(n)]) if n else np.zeros((0, 200))


def relevant_groups(x, group_size=10, threshold=0.8):
    """Boolean ``(..., n_groups)``: every feature of the group exceeds ``threshold``."""
    x = np.asarray(x)
    g = x.reshape(x.shape[:-1] + (-1, group_size))
    return np.all(g > threshold, axis=-1)


def recall_precision(truth, recon, group_size=10, threshold=0.8):
    """Per-sample-averaged group recall and precision (an empty set scores 1)."""
    t = relevant_groups(truth, group_size, 0.5)
    p = relevant_groups(recon, group_size, threshold)
    hits = (t & p).sum(axis=-1)
    nt, np_ = t.sum(axis=-1), p.sum(axis=-1)
    recall = np.where(nt > 0, hits / np.maximum(nt, 1), 1.0)
    precision = np.where(np_ > 0, hits / np.maximum(np_, 1), 1.0)
    return float(np.mean(recall)), float(np.mean(precision))


def corrupt(data, p, nu, rng):
    """Add ``N(0, nu^2)`` noise, then hide each coordinate independently w.p. ``p``."""
    if not 0 <= p < 1:
        raise ConfigurationError(f"missing probability must lie in [0, 1), got {p}")
    data = np.asarray(data, dtype=np.float64)
    noisy = data + np.asarray(nu) * rng.standard_normal(data.shape)
    mask = rng.random(data.shape) >= p
    return ImperfectDataset(noisy, mask, nu)
