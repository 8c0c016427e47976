"""Combinatorial semi-bandit on random mazes: UCB1 and the oracle.

Each task is a perfect maze on a 10 x 10 grid; arms are its 180 edges and a
super-arm is a corner-to-corner path. No prior is trained here.
"""

import numpy as np

from diffts.agents import OraclePolicy, UCB1Policy
from diffts.environments import make_problem
from diffts.harness import run_episode, unit_rng

problem = make_problem("maze")
rng = np.random.default_rng(0)
tasks = [problem.to_task(mu) for mu in problem.means(rng, 5)]
for policy in (OraclePolicy(structure=problem.structure, name="oracle"),
               UCB1Policy(structure=problem.structure, name="ucb1", sigma_assumed=problem.sigma_assumed)):
    finals = [run_episode(policy, t, 200, unit_rng(0, i), i)[-1].cum_regret for i, t in enumerate(tasks)]
    print(f"{policy.name:>6}: mean cumulative regret after 200 rounds {np.mean(finals):.2f}")
