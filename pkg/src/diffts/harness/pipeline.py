"""End-to-end experiment pipeline: data, priors, bandit evaluation."""

import copy
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import io
from ..agents import (DiffTSPolicy, GaussianTSPolicy, GmmTSPolicy, InteractionState, OraclePolicy,
                      RandomPolicy, UCB1Policy, fit_gaussian, fit_gaussian_imperfect, fit_gmm)
from ..calibration import CalibrationMode, calibrate
from ..diffusion import DenoiserModel, TrainConfig, train_denoiser
from ..environments import corrupt, make_problem, step
from ..errors import ConfigurationError, DiffTSError, StageError
from ..imperfect import ImperfectTrainConfig, train_imperfect
from ..schedule import build_schedule
from .records import RegretRecord, summarize
from .seeding import derive_seed, unit_rng

log = logging.getLogger(__name__)


@dataclass
class Datasets:
    train: np.ndarray
    cal: np.ndarray
    test: np.ndarray
    train_deg: object = None
    cal_deg: object = None

    @property
    def imperfect(self):
        return self.train_deg is not None


def build_problem(config):
    return make_problem(config.problem, seed=derive_seed(config.seed, "problem"),
                        noise_std=config.reward_noise, maze_side=config.maze_side)


def build_datasets(config, problem=None):
    problem = problem or build_problem(config)
    m = config.seed
    ds = Datasets(problem.means(unit_rng(m, "train"), config.n_train),
                  problem.means(unit_rng(m, "cal"), config.n_cal),
                  problem.means(unit_rng(m, "test"), config.n_test))
    if config.corruption is not None:
        p, nu = config.corruption
        ds.train_deg = corrupt(ds.train, p, nu, unit_rng(m, "corrupt", "train"))
        ds.cal_deg = corrupt(ds.cal, p, nu, unit_rng(m, "corrupt", "cal"))
    return ds


def schedule_for(config):
    t = config.training
    return build_schedule(t.n_steps, t.one_minus_alpha_first, t.one_minus_alpha_last)


def train_config_for(config):
    t = config.training
    return TrainConfig(lr=t.lr, beta1=t.beta1, beta2=t.beta2, batch_size=t.batch_size, steps=t.steps,
                       seed=derive_seed(config.seed, "train-model"))


def imperfect_config_for(config):
    t = config.training
    return ImperfectTrainConfig(lam=t.lam, sure_eps=t.sure_eps, warmup_steps=t.warmup_steps,
                                n_outer=t.n_outer, n_inner=t.n_inner, impute_value=t.impute_value,
                                delta_floor=t.delta, weighted=t.weighted, base=train_config_for(config))


def train_clean_prior(config, data, calset):
    """Train a denoiser on clean vectors and calibrate it on a held-out set."""
    t = config.training
    model = train_denoiser(data, schedule_for(config), train_config_for(config),
                           hidden=t.hidden, emb_dim=t.emb_dim, target=t.target)
    sigma = calibrate(model, calset, unit_rng(config.seed, "calibrate"))
    return model, sigma


def train_imperfect_prior(config, dataset, calset):
    t = config.training
    res = train_imperfect(dataset, calset, schedule_for(config), imperfect_config_for(config),
                          hidden=t.hidden, emb_dim=t.emb_dim, target=t.target)
    return res.model, res.sigma


@dataclass
class PriorCache:
    config: object
    data: Datasets
    store: dict = field(default_factory=dict)

    def get(self, key, build):
        if key not in self.store:
            self.store[key] = build()
        return self.store[key]

    def diffusion(self, agent):
        if agent.model is not None:
            model = self.get(("model-file", agent.model), lambda: io.load_model(agent.model))
            if agent.sigma is not None:
                sigma = self.get(("sigma-file", agent.sigma), lambda: io.load_sigma(agent.sigma))
            else:
                sigma = self.get(("calib", agent.model),
                                 lambda: calibrate(model, self.data.cal, unit_rng(self.config.seed, "calibrate")))
            return model, sigma
        if self.data.imperfect or self.config.training.imperfect:
            if not self.data.imperfect:
                raise ConfigurationError("imperfect training requested without a [corruption] section")
            return self.get("diffusion", lambda: train_imperfect_prior(self.config, self.data.train_deg,
                                                                       self.data.cal_deg))
        return self.get("diffusion", lambda: train_clean_prior(self.config, self.data.train, self.data.cal))

    def gaussian(self, mode):
        if self.data.imperfect:
            return self.get(("gauss", mode), lambda: fit_gaussian_imperfect(self.data.train_deg, mode))
        return self.get(("gauss", mode), lambda: fit_gaussian(self.data.train, mode))

    def gmm(self, k):
        if self.data.imperfect:
            raise ConfigurationError("the mixture prior is only fitted on clean data")
        return self.get(("gmm", k), lambda: fit_gmm(self.data.train, k, unit_rng(self.config.seed, "gmm", k)))


def make_policy(agent, cache, problem):
    kw = dict(structure=problem.structure, name=agent.name,
              sigma_assumed=problem.sigma_assumed if agent.sigma_assumed is None else agent.sigma_assumed)
    if agent.kind == "diffts":
        model, sigma = cache.diffusion(agent)
        if model.dim != problem.dim:
            raise ConfigurationError(f"agent {agent.name}: model dimension {model.dim} != {problem.dim} arms")
        return DiffTSPolicy(model, sigma.with_mode(CalibrationMode(agent.calibration)),
                            agent.noise_mode, **kw)
    if agent.kind == "ucb1":
        return UCB1Policy(**kw)
    if agent.kind in ("gts_diag", "gts_full"):
        return GaussianTSPolicy(cache.gaussian(agent.kind[4:]), **kw)
    if agent.kind == "gmm_ts":
        return GmmTSPolicy(cache.gmm(agent.n_components), **kw)
    if agent.kind == "oracle":
        return OraclePolicy(**kw)
    return RandomPolicy(**kw)


def run_episode(policy, task, horizon, rng, task_id):
    """Play ``horizon`` rounds; returns the task's regret records."""
    policy.reset(task)
    state = InteractionState(task.n_arms, policy.sigma_assumed)
    records, cum = [], 0.0
    for t in range(1, horizon + 1):
        action = policy.select(state, rng)
        rewards, regret = step(task, action, rng)
        state.update(action, rewards)
        cum += regret
        records.append(RegretRecord(task_id, policy.name, t, regret, cum))
    return records


def check_paths(config):
    for a in config.agents:
        for p in (a.model, a.sigma):
            if p is not None and not os.path.exists(p):
                raise StageError("launch", f"agent {a.name}: file not found: {p}")


@dataclass
class ExperimentResult:
    records: list
    summary: list


def run_experiment(config, datasets=None, sink=None):
    """Evaluate every configured agent on every test task.

    ``sink``, if given, receives each task's records in task order as soon as
    they are complete, so a failure part-way leaves the finished tasks behind.
    """
    check_paths(config)
    if not config.agents:
        raise ConfigurationError("no agents configured")
    problem = build_problem(config)
    try:
        data = datasets or build_datasets(config, problem)
    except DiffTSError as exc:
        raise StageError("datasets", str(exc))
    cache = PriorCache(config, data)
    policies = []
    for agent in config.agents:
        try:
            policies.append((agent, make_policy(agent, cache, problem)))
        except DiffTSError as exc:
            raise StageError(f"prior:{agent.name}", str(exc))
        except OSError as exc:
            raise StageError(f"prior:{agent.name}", f"{exc.filename}: {exc.strerror}")
    tasks = [problem.to_task(mu) for mu in data.test]

    def run_task(i):
        out = []
        for agent, policy in policies:
            # policies carry per-task state only through reset, so copy per thread
            pol = policy if config.workers == 1 else _clone(policy)
            rng = unit_rng(config.seed, "run", i, agent.name)
            out.extend(run_episode(pol, tasks[i], config.horizon, rng, i))
        return out

    chunks = []
    try:
        if config.workers == 1:
            results = (run_task(i) for i in range(len(tasks)))
            _collect(results, chunks, sink)
        else:
            with ThreadPoolExecutor(config.workers) as ex:
                _collect(ex.map(run_task, range(len(tasks))), chunks, sink)
    except DiffTSError as exc:
        raise StageError("run", str(exc))
    records = [r for c in chunks for r in c]
    return ExperimentResult(records, summarize(records))


def _collect(results, chunks, sink):
    for chunk in results:
        chunks.append(chunk)
        if sink is not None:
            sink(chunk)


def _clone(policy):
    return copy.copy(policy)
