"""Gaussian-mixture priors: EM fitting and mixture Thompson sampling."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from ..errors import ConfigurationError
from .gaussian import EIG_FLOOR, GaussianPrior, floor_eigenvalues, gaussian_posterior_sample


@dataclass(eq=False)
class GmmPrior:
    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(self.weights <= 0) or not np.isclose(self.weights.sum(), 1.0):
            raise ConfigurationError("mixture weights must be positive and sum to 1")
        self.means = np.asarray(self.means, dtype=np.float64)
        self.covs = np.asarray(self.covs, dtype=np.float64)

    @property
    def n_components(self):
        return len(self.weights)

    def component(self, k):
        if not hasattr(self, "_components"):
            self._components = [GaussianPrior(m, c) for m, c in zip(self.means, self.covs)]
        return self._components[k]


def _log_gauss(x, mean, cov):
    """Row-wise log-density of ``N(mean, cov)``."""
    chol = linalg.cholesky(cov, lower=True)
    z = linalg.solve_triangular(chol, (x - mean).T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (np.sum(z ** 2, axis=0) + logdet + x.shape[1] * np.log(2 * np.pi))


def kmeans_pp_seeds(data, k, rng):
    """k-means++ seeding: each new centre drawn with probability ~ squared distance."""
    n = len(data)
    centres = [data[rng.integers(n)]]
    d2 = np.sum((data - centres[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centres.append(data[idx])
        d2 = np.minimum(d2, np.sum((data - data[idx]) ** 2, axis=1))
    return np.array(centres)


def fit_gmm(data, n_components, rng, max_iter=300, tol=1e-6, patience=50, floor=EIG_FLOOR):
    """Full-covariance EM with k-means++ initialisation and an eigenvalue floor.

    Stops when the mean log-likelihood improves by less than ``tol``; if no
    new best is reached for ``patience`` iterations, returns the best
    parameters seen with a warning.
    """
    data = np.asarray(data, dtype=np.float64)
    n, d = data.shape
    if not 1 <= n_components <= n:
        raise ConfigurationError(f"need 1 <= n_components <= {n}, got {n_components}")
    means = kmeans_pp_seeds(data, n_components, rng)
    base = floor_eigenvalues(np.cov(data, rowvar=False).reshape(d, d), floor)
    covs = np.repeat(base[None], n_components, axis=0)
    weights = np.full(n_components, 1.0 / n_components)
    best, best_ll, stale, prev = None, -np.inf, 0, -np.inf
    for _ in range(max_iter):
        logp = np.stack([np.log(weights[k]) + _log_gauss(data, means[k], covs[k])
                         for k in range(n_components)], axis=1)
        norm = logsumexp(logp, axis=1)
        ll = float(norm.mean())
        if ll > best_ll:
            best, best_ll, stale = (weights.copy(), means.copy(), covs.copy()), ll, 0
        else:
            stale += 1
            if stale >= patience:
                warnings.warn("EM stopped improving; returning the best parameters found",
                              RuntimeWarning, stacklevel=2)
                break
        if abs(ll - prev) < tol:
            break
        prev = ll
        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0) + 1e-12
        weights = nk / n
        means = (resp.T @ data) / nk[:, None]
        for k in range(n_components):
            c = data - means[k]
            covs[k] = floor_eigenvalues((resp[:, k, None] * c).T @ c / nk[k], floor)
    w, m, c = best
    w = np.maximum(w, 1e-300)
    return GmmPrior(w / w.sum(), m, c)


def gmm_responsibilities(prior, state):
    """Posterior component probabilities given the pulled arms' empirical means."""
    pulled = state.pulled
    logw = np.log(prior.weights)
    if not np.any(pulled):
        return prior.weights.copy()
    y = (state.sums / np.maximum(state.counts, 1))[pulled]
    r2 = state.sigma_assumed ** 2 / state.counts[pulled]
    ll = np.empty(prior.n_components)
    for k in range(prior.n_components):
        cov = prior.covs[k][np.ix_(pulled, pulled)] + np.diag(r2)
        ll[k] = _log_gauss(y[None], prior.means[k][pulled], cov)[0]
    logr = logw + ll
    return np.exp(logr - logsumexp(logr))


def gmm_posterior_sample(prior, state, rng):
    resp = gmm_responsibilities(prior, state)
    # a single component consumes no draw, so it matches plain Gaussian TS
    k = 0 if prior.n_components == 1 else int(rng.choice(prior.n_components, p=resp))
    return gaussian_posterior_sample(prior.component(k), state, rng)


def gmm_ts_select(prior, state, rng):
    return int(np.argmax(gmm_posterior_sample(prior, state, rng)))
