"""Train a prior from vectors with half of their entries missing.

Compares a model trained only on the raw observations (warm-up) against one
that continues with EM repeats on posterior completions, at the same total
number of optimiser steps.
"""

import numpy as np

from diffts import ImperfectTrainConfig, NoiseMode, Observation, TrainConfig, build_schedule, posterior_sample
from diffts import train_imperfect
from diffts.environments import corrupt, recall_precision, toy_groups_dataset

rng = np.random.default_rng(100)
train, cal, test = (toy_groups_dataset(rng, n) for n in (2000, 200, 100))
dtr, dcal, dte = (corrupt(x, 0.5, 0.0, rng) for x in (train, cal, test))

warm, repeats, inner = 1500, 3, 500
configs = {
    "warm-up only": ImperfectTrainConfig(warmup_steps=warm + repeats * inner, n_outer=0, base=TrainConfig()),
    "warm-up + EM": ImperfectTrainConfig(warmup_steps=warm, n_outer=repeats, n_inner=inner, base=TrainConfig()),
}
for name, cfg in configs.items():
    res = train_imperfect(dtr, dcal, build_schedule(), cfg)
    x = posterior_sample(res.model, res.sigma, Observation(dte.y, dte.mask, 0.01), NoiseMode.PREDICTED,
                         np.random.default_rng(7))
    print(f"{name:>13}: recall {recall_precision(test, x)[0]:.3f}")
