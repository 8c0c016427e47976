import sys

import numpy as np
import pytest

from diffts import build_schedule


class AnalyticDenoiser:
    """Closed-form ``D(x, step)`` exposing the interface the samplers rely on."""

    def __init__(self, schedule, dim, fn):
        self.schedule, self.dim, self._fn = schedule, dim, fn

    def denoise(self, x, steps):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x2 = x[None] if single else x
        st = np.asarray(steps)
        st = np.full(len(x2), int(st)) if st.ndim == 0 else st
        self.schedule.check_step(st)
        out = self._fn(x2, st)
        return out[0] if single else out

    def denoise_with_backward(self, x, steps):
        # no parameters to differentiate
        return self.denoise(x, steps), lambda g: np.zeros(0)


def gaussian_denoiser(schedule, dim, mean=0.0, var=1.0):
    """Posterior mean of ``x0 ~ N(mean, var I)`` given ``x_step``."""
    def fn(x, st):
        ab = schedule.alpha_bar[st][:, None]
        return mean + var * np.sqrt(ab) * (x - np.sqrt(ab) * mean) / (ab * var + 1.0 - ab)
    return AnalyticDenoiser(schedule, dim, fn)


def constant_denoiser(schedule, c):
    c = np.asarray(c, dtype=np.float64)
    return AnalyticDenoiser(schedule, len(c), lambda x, st: np.broadcast_to(c, x.shape).copy())


def linear_denoiser(schedule, A):
    return AnalyticDenoiser(schedule, A.shape[0], lambda x, st: x @ A.T)


@pytest.fixture
def schedule():
    return build_schedule()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


POINT_MASS = np.array([0.8, 0.1, 0.5, 0.3])


@pytest.fixture(scope="session")
def point_mass_model():
    from diffts import TrainConfig, train_denoiser

    data = np.tile(POINT_MASS, (64, 1))
    return train_denoiser(data, build_schedule(), TrainConfig(steps=3000, seed=0), hidden=(32, 32), emb_dim=8)


def all_paths(structure):
    g = structure.graph
    out = []

    def walk(node, seen, edges):
        if node == structure.destination:
            out.append(list(edges))
            return
        for v, e in g.neighbors(node):
            if v not in seen:
                walk(v, seen | {v}, edges + [e])

    walk(structure.source, {structure.source}, [])
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
