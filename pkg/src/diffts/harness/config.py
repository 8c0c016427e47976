"""Experiment configuration read from INI files.

Schema (all keys optional unless noted; see ``docs/config.md``)::

    [experiment]   problem (required), seed, horizon, n_train, n_cal, n_test,
                   reward_noise, workers, maze_side
    [corruption]   p, nu                      (section presence enables it)
    [training]     steps, lr, beta1, beta2, batch_size, hidden, emb_dim, target,
                   n_steps, one_minus_alpha_first, one_minus_alpha_last,
                   imperfect, lam, sure_eps, warmup_steps, n_outer, n_inner,
                   weighted, delta, impute_value
    [agent:<name>] kind (required), sigma_assumed, noise_mode, calibration,
                   n_components, model, sigma
"""

import configparser
import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Tuple

from ..calibration import CalibrationMode
from ..diffusion import TargetMode
from ..errors import ConfigurationError
from ..posterior import NoiseMode

AGENT_KINDS = ("diffts", "ucb1", "gts_diag", "gts_full", "gmm_ts", "oracle", "random")
SEED_MAX = 2 ** 64


@dataclass
class AgentConfig:
    name: str
    kind: str
    sigma_assumed: Optional[float] = None
    noise_mode: str = "predicted"
    calibration: str = "full"
    n_components: int = 10
    model: Optional[str] = None
    sigma: Optional[str] = None

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ConfigurationError(f"agent {self.name!r}: unknown kind {self.kind!r}")
        NoiseMode(self.noise_mode)
        CalibrationMode(self.calibration)
        if self.sigma_assumed is not None and self.sigma_assumed < 0:
            raise ConfigurationError(f"agent {self.name!r}: sigma_assumed must be >= 0")
        if self.n_components < 1:
            raise ConfigurationError(f"agent {self.name!r}: n_components must be >= 1")


@dataclass
class TrainingSection:
    steps: int = 15000
    lr: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.99
    batch_size: int = 128
    hidden: Tuple[int, ...] = (256, 256, 256)
    emb_dim: int = 32
    target: str = "clean"
    n_steps: int = 100
    one_minus_alpha_first: float = 1e-4
    one_minus_alpha_last: float = 0.1
    imperfect: bool = False
    lam: float = 0.1
    sure_eps: float = 1e-5
    warmup_steps: int = 15000
    n_outer: int = 3
    n_inner: int = 3000
    weighted: bool = False
    delta: float = 0.0
    impute_value: float = 0.5

    def __post_init__(self):
        TargetMode(self.target)


@dataclass
class ExperimentConfig:
    problem: str
    seed: int = 0
    horizon: int = 200
    n_train: int = 5000
    n_cal: int = 1000
    n_test: int = 100
    reward_noise: float = 0.1
    workers: int = 1
    maze_side: int = 10
    corruption: Optional[Tuple[float, float]] = None
    training: TrainingSection = field(default_factory=TrainingSection)
    agents: Tuple[AgentConfig, ...] = ()

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if not 0 <= self.seed < SEED_MAX:
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        if min(self.n_train, self.n_cal, self.n_test) < 0 or self.workers < 1:
            raise ConfigurationError("dataset sizes must be >= 0 and workers >= 1")
        names = [a.name for a in self.agents]
        if len(set(names)) != len(names):
            raise ConfigurationError("agent names must be unique")
        if self.corruption is not None:
            p, nu = self.corruption
            if not 0 <= p < 1 or nu < 0:
                raise ConfigurationError("corruption needs 0 <= p < 1 and nu >= 0")

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=int(seed))

    def as_dict(self):
        return dataclasses.asdict(self)


def _coerce(cls, section, name):
    """Build dataclass ``cls`` from an INI section, converting by field type."""
    kwargs = {}
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key, raw in section.items():
        if key not in fields:
            raise ConfigurationError(f"[{name}]: unknown key {key!r}")
        default = fields[key].default
        try:
            if isinstance(default, bool):
                kwargs[key] = section.getboolean(key)
            elif isinstance(default, int):
                kwargs[key] = int(raw)
            elif isinstance(default, float):
                kwargs[key] = float(raw)
            elif isinstance(default, tuple):
                kwargs[key] = tuple(int(v) for v in raw.split(",") if v.strip())
            elif key in ("sigma_assumed",):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw.strip()
        except ValueError as exc:
            raise ConfigurationError(f"[{name}] {key} = {raw!r}: {exc}")
    return kwargs


def parse_config(text):
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}")
    if not cp.has_section("experiment"):
        raise ConfigurationError("config needs an [experiment] section")
    exp = _coerce(ExperimentConfig, cp["experiment"], "experiment")
    for bad in ("corruption", "training", "agents"):
        if bad in exp:
            raise ConfigurationError(f"[experiment]: {bad!r} belongs in its own section")
    if "problem" not in exp:
        raise ConfigurationError("[experiment] needs a problem key")
    if cp.has_section("corruption"):
        sec = cp["corruption"]
        try:
            exp["corruption"] = (sec.getfloat("p", 0.5), sec.getfloat("nu", 0.1))
        except ValueError as exc:
            raise ConfigurationError(f"[corruption]: {exc}")
    if cp.has_section("training"):
        exp["training"] = TrainingSection(**_coerce(TrainingSection, cp["training"], "training"))
    agents = []
    for sec in cp.sections():
        if sec.startswith("agent:"):
            name = sec.split(":", 1)[1].strip()
            kw = _coerce(AgentConfig, cp[sec], sec)
            if "kind" not in kw:
                raise ConfigurationError(f"[{sec}] needs a kind key")
            kw.pop("name", None)
            agents.append(AgentConfig(name=name, **kw))
        elif sec not in ("experiment", "corruption", "training"):
            raise ConfigurationError(f"unknown section [{sec}]")
    exp["agents"] = tuple(agents)
    return ExperimentConfig(**exp)


def load_config(path):
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}")
