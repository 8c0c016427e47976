"""Named problems: mean-vector generators and the vector-to-task mapping."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ConfigurationError
from .generators import (POPULAR_NICHE_DESK, LabeledArmsDistribution, PopularNicheConfig,
                         popular_niche_mean, toy_groups_dataset)
from .maze import MazeTask, SuperArmStructure, maze_mean
from .tasks import GaussianTask


@dataclass
class Problem:
    name: str
    dim: int
    sample_mean: Callable  # rng -> mean vector
    to_task: Callable  # mean vector -> task
    sigma_assumed: float = 0.1
    structure: Optional[SuperArmStructure] = None

    def means(self, rng, n):
        return np.stack([self.sample_mean(rng) for _ in range(n)]) if n else np.zeros((0, self.dim))


def _gaussian(noise_std):
    return lambda mu: GaussianTask(mu, noise_std)


def make_problem(name, seed=0, noise_std=0.1, maze_side=10):
    """Build a registered problem; ``seed`` fixes any distribution-level randomness."""
    if name in ("popular_niche", "popular_niche_desk"):
        cfg = PopularNicheConfig() if name == "popular_niche" else POPULAR_NICHE_DESK
        return Problem(name, cfg.n_arms, lambda rng: popular_niche_mean(rng, cfg), _gaussian(noise_std))
    if name == "labeled_arms":
        dist = LabeledArmsDistribution(np.random.default_rng([int(seed), 7]))
        return Problem(name, dist.n_arms, dist.mean, _gaussian(noise_std))
    if name == "maze":
        st = SuperArmStructure.corners(maze_side)
        return Problem(name, st.n_base_arms, lambda rng: maze_mean(rng, maze_side),
                       lambda mu: MazeTask(mu, st, noise_std), structure=st)
    if name == "toy_groups":
        return Problem(name, 200, lambda rng: toy_groups_dataset(rng, 1)[0], _gaussian(noise_std))
    raise ConfigurationError(f"unknown problem {name!r}; known: {', '.join(PROBLEMS)}")


PROBLEMS = ("popular_niche", "popular_niche_desk", "labeled_arms", "maze", "toy_groups")
