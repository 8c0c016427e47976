"""Container for masked, noisy datasets."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(eq=False)
class ImperfectDataset:
    """Rows ``y = mask * (x0 + noise)`` with known mask and noise std ``nu``.

    ``nu`` is a scalar (homogeneous noise), a ``(d,)`` array, or a full
    ``(n, d)`` array. Masked entries of ``y`` are stored as 0.
    """

    y: np.ndarray
    mask: np.ndarray
    nu: object = 0.0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.y.ndim != 2 or self.y.shape != self.mask.shape:
            raise ConfigurationError("y and mask must be (n, d) arrays of equal shape")
        nu = np.asarray(self.nu, dtype=np.float64)
        try:
            np.broadcast_to(nu, self.y.shape)
        except ValueError:
            raise ConfigurationError(f"nu of shape {nu.shape} does not broadcast to {self.y.shape}")
        if np.any(nu < 0):
            raise ConfigurationError("noise std must be non-negative")
        self.nu = float(nu) if nu.ndim == 0 else nu
        if not np.all(np.isfinite(self.y[self.mask])):
            raise ConfigurationError("observed entries must be finite")
        self.y = np.where(self.mask, self.y, 0.0)

    def __len__(self):
        return len(self.y)

    @property
    def dim(self):
        return self.y.shape[1]

    @property
    def homogeneous(self):
        return np.ndim(self.nu) == 0

    def nu_array(self):
        return np.array(np.broadcast_to(self.nu, self.y.shape), dtype=np.float64)

    def imputed(self, value):
        return np.where(self.mask, self.y, value)

    def subset(self, idx):
        nu = self.nu if np.ndim(self.nu) < 2 else self.nu[idx]
        return ImperfectDataset(self.y[idx], self.mask[idx], nu)
