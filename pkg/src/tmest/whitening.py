"""Feature decorrelation via eigendecomposition of the sample second moment.

Features are centered, projected onto the eigenbasis of their covariance and
rescaled per-axis so the transformed data has identity covariance (denominator
N, matching the second-moment convention).
"""

import json
from dataclasses import dataclass

import numpy as np

from .core import DataError, _freeze


@dataclass
class WhiteningTransform:
    """Centering + rotation + per-axis rescaling, possibly rank-truncated.

    eigenvectors is d x r with orthonormal columns; eigenvalues are the
    corresponding positive variances, sorted descending.
    """

    mean: np.ndarray
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        self.mean = _freeze(np.asarray(self.mean, dtype=np.float64))
        self.eigenvectors = _freeze(np.asarray(self.eigenvectors, dtype=np.float64))
        self.eigenvalues = _freeze(np.asarray(self.eigenvalues, dtype=np.float64))
        if self.eigenvectors.shape != (self.d, self.r):
            raise DataError("eigenvector matrix must be d x r")
        if self.eigenvalues.shape != (self.r,):
            raise DataError("need one eigenvalue per retained direction")
        if np.any(self.eigenvalues <= 0):
            raise DataError("retained eigenvalues must be strictly positive")
        if np.any(np.diff(self.eigenvalues) > 0):
            raise DataError("eigenvalues must be sorted descending")
        gram = self.eigenvectors.T @ self.eigenvectors
        if np.max(np.abs(gram - np.eye(self.r))) > 1e-8:
            raise DataError("eigenvector columns must be orthonormal")

    @property
    def d(self):
        return self.mean.shape[0]

    @property
    def r(self):
        return self.eigenvalues.shape[0]

    def project(self, x):
        """Map raw feature rows (…, d) to whitened coordinates (…, r)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.d:
            raise DataError(f"dimension mismatch: transform expects d={self.d}")
        return (x - self.mean) @ self.eigenvectors / np.sqrt(self.eigenvalues)

    def reconstruct(self, z):
        """Inverse map; exact only when no rank truncation occurred."""
        z = np.asarray(z, dtype=np.float64)
        return z * np.sqrt(self.eigenvalues) @ self.eigenvectors.T + self.mean

    def to_json(self):
        return {
            "mean": self.mean.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(np.array(obj["mean"]), np.array(obj["eigenvectors"]),
                   np.array(obj["eigenvalues"]))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def fit_whitening(data, eigen_floor=1e-10):
    """Eigendecompose the covariance of the dataset's (centered) features.

    Directions whose eigenvalue falls below eigen_floor * lambda_max are
    dropped; they carry no variance worth keeping and would blow up the
    1/sqrt(lambda) rescaling.
    """
    x = data.features
    if x.shape[0] < 2:
        raise DataError("need at least 2 rows to fit a whitening transform")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / x.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals[0] <= 0:
        raise DataError("all feature directions have zero variance")
    keep = evals > eigen_floor * evals[0]
    evals, evecs = evals[keep], evecs[:, keep]
    # fix eigenvector signs for reproducibility: largest-|.| component positive
    flip = evecs[np.argmax(np.abs(evecs), axis=0), np.arange(evecs.shape[1])] < 0
    evecs = evecs * np.where(flip, -1.0, 1.0)
    return WhiteningTransform(mean, evecs, evals)


def apply_whitening(transform, data):
    """Replace the dataset's features by their whitened coordinates."""
    return data.with_features(transform.project(data.features))
