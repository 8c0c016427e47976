"""Gaussian priors over mean-reward vectors and conjugate Thompson sampling."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ..errors import ConfigurationError, NumericalError

EIG_FLOOR = 1e-4


def floor_eigenvalues(cov, floor=EIG_FLOOR):
    cov = 0.5 * (cov + cov.T)
    w, v = np.linalg.eigh(cov)
    out = (v * np.maximum(w, floor)) @ v.T
    return 0.5 * (out + out.T)


@dataclass(eq=False)
class GaussianPrior:
    """``N(mean, cov)``; ``cov`` is a vector of variances (diag) or a full matrix."""

    mean: np.ndarray
    cov: np.ndarray
    _prec: np.ndarray = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.cov = np.asarray(self.cov, dtype=np.float64)
        k = len(self.mean)
        if self.cov.shape not in ((k,), (k, k)):
            raise ConfigurationError(f"covariance shape {self.cov.shape} does not match mean length {k}")
        if self.diagonal:
            if np.any(self.cov < 0):
                raise ConfigurationError("variances must be non-negative")
        elif not np.allclose(self.cov, self.cov.T):
            raise ConfigurationError("covariance must be symmetric")

    @property
    def diagonal(self):
        return self.cov.ndim == 1

    @property
    def dim(self):
        return len(self.mean)

    def precision(self):
        if self._prec is None:
            try:
                c = linalg.cho_factor(self.cov, lower=True)
            except linalg.LinAlgError as exc:
                raise NumericalError(f"prior covariance is not positive-definite: {exc}")
            self._prec = linalg.cho_solve(c, np.eye(self.dim))
            self._prec = 0.5 * (self._prec + self._prec.T)
        return self._prec


def _obs_precision(state):
    """Observation precision ``N_a / sigma^2`` (zero for unpulled arms) and means."""
    n = state.counts.astype(np.float64)
    y = np.where(state.pulled, state.sums / np.maximum(n, 1.0), 0.0)
    s2 = state.sigma_assumed ** 2
    if s2 == 0:
        prec = np.where(n > 0, np.inf, 0.0)
    else:
        prec = n / s2
    return prec, y


def diag_posterior(prior, state):
    """Coordinate-wise conjugate posterior ``(mean, var)``."""
    prec, y = _obs_precision(state)
    m0, v0 = prior.mean, prior.cov
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = 1.0 / prec
        var = np.where(prec > 0, v0 * r2 / (v0 + r2), v0)
        mean = np.where(prec > 0, (m0 * r2 + y * v0) / (v0 + r2), m0)
    var = np.where(np.isinf(prec), 0.0, var)
    mean = np.where(np.isinf(prec), y, mean)
    var = np.where((prec > 0) & (v0 == 0), 0.0, var)
    mean = np.where((prec > 0) & (v0 == 0), m0, mean)
    return mean, var


def full_posterior(prior, state):
    """Multivariate conjugate update; returns ``(mean, cholesky_of_precision)``."""
    prec, y = _obs_precision(state)
    if np.any(np.isinf(prec)):
        raise ConfigurationError("full-covariance update needs a positive assumed noise level")
    p0 = prior.precision()
    post_prec = p0 + np.diag(prec)
    try:
        chol = linalg.cholesky(post_prec, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"posterior precision is not positive-definite: {exc}")
    rhs = p0 @ prior.mean + prec * y
    mean = linalg.cho_solve((chol, True), rhs)
    return mean, chol


def gaussian_posterior_sample(prior, state, rng):
    z = rng.standard_normal(prior.dim)
    if prior.diagonal:
        mean, var = diag_posterior(prior, state)
        return mean + np.sqrt(var) * z
    mean, chol = full_posterior(prior, state)
    return mean + linalg.solve_triangular(chol.T, z, lower=False)


def gaussian_ts_select(prior, state, rng):
    return int(np.argmax(gaussian_posterior_sample(prior, state, rng)))


def fit_gaussian(data, mode="diag"):
    """Sample mean and covariance of clean vectors (eigenvalue floor in full mode)."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or len(data) < 2:
        raise ConfigurationError("need at least two (n, d) samples to fit a Gaussian")
    mean = data.mean(axis=0)
    if mode == "diag":
        return GaussianPrior(mean, data.var(axis=0, ddof=1))
    if mode == "full":
        return GaussianPrior(mean, floor_eigenvalues(np.cov(data, rowvar=False)))
    raise ConfigurationError(f"unknown covariance mode {mode!r}")


def pairwise_covariance(y, mask):
    """Pairwise-complete covariance: each entry uses the rows observing both coordinates."""
    m = mask.astype(np.float64)
    my = m * y
    n = m.T @ m
    sa = my.T @ m  # sa[a, b] = sum of y_a over rows observing a and b
    sab = my.T @ my
    with np.errstate(invalid="ignore", divide="ignore"):
        cov = (sab - sa * sa.T / n) / (n - 1)
    short = n < 2
    if np.any(short):
        warnings.warn(f"{int(np.triu(short).sum())} coordinate pair(s) observed jointly fewer than twice; "
                      "their covariance is set to 0", RuntimeWarning, stacklevel=3)
        cov[short] = 0.0
    return cov


def fit_gaussian_imperfect(dataset, mode="diag"):
    """Gaussian fit from masked, noisy rows with the known noise variance removed.

    Means use the rows observing each coordinate; covariances are
    pairwise-complete. ``nu^2`` is subtracted on the diagonal; diag mode then
    floors variances at 0, full mode floors eigenvalues at ``1e-4``.
    """
    y, mask = dataset.y, dataset.mask
    counts = mask.sum(axis=0)
    if np.any(counts == 0):
        raise ConfigurationError("every coordinate must be observed at least once")
    mean = (y * mask).sum(axis=0) / counts
    nu2 = dataset.nu_array() ** 2
    nu2_coord = (nu2 * mask).sum(axis=0) / counts
    if mode == "diag":
        centered = np.where(mask, y - mean, 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            var = (centered ** 2).sum(axis=0) / (counts - 1)
        if np.any(counts < 2):
            warnings.warn("coordinate(s) observed fewer than twice; variance set to 0",
                          RuntimeWarning, stacklevel=2)
            var[counts < 2] = 0.0
        return GaussianPrior(mean, np.maximum(var - nu2_coord, 0.0))
    if mode == "full":
        cov = pairwise_covariance(y, mask)
        cov[np.diag_indices_from(cov)] -= nu2_coord
        return GaussianPrior(mean, floor_eigenvalues(cov))
    raise ConfigurationError(f"unknown covariance mode {mode!r}")
