"""Weighted (soft) cosine similarity and exact 2-nearest-neighbor retrieval.

The 2-NN search is brute force (O(N^2 d), chunked over query rows) so that
neighbor sets are exact and deterministic; ties break toward the lower row
index.
"""

from dataclasses import dataclass

import numpy as np

from .core import DataError, _freeze

_CHUNK = 512


@dataclass
class SimilarityWeights:
    """Identity, per-dimension diagonal, or full symmetric PSD weighting."""

    form: str                      # "identity" | "diagonal" | "full"
    w: np.ndarray | None = None    # vector (diagonal) or matrix (full)

    def __post_init__(self):
        if self.form == "identity":
            if self.w is not None:
                raise DataError("identity weights take no matrix")
            return
        self.w = _freeze(np.asarray(self.w, dtype=np.float64))
        if self.form == "diagonal":
            if self.w.ndim != 1 or np.any(self.w < 0):
                raise DataError("diagonal weights must be a nonnegative vector")
        elif self.form == "full":
            if self.w.ndim != 2 or self.w.shape[0] != self.w.shape[1]:
                raise DataError("full weights must be a square matrix")
            if np.max(np.abs(self.w - self.w.T)) > 1e-9:
                raise DataError("full weight matrix must be symmetric")
        else:
            raise DataError(f"unknown weight form '{self.form}'")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def diagonal(cls, w):
        return cls("diagonal", np.asarray(w, dtype=np.float64))

    @classmethod
    def full(cls, mat):
        return cls("full", np.asarray(mat, dtype=np.float64))

    def _check_dim(self, d):
        if self.form == "diagonal" and self.w.shape[0] != d:
            raise DataError("weight vector length does not match feature dimension")
        if self.form == "full" and self.w.shape[0] != d:
            raise DataError("weight matrix size does not match feature dimension")


def soft_cosine(x, x2, weights):
    """Cosine similarity under the quadratic form x^T W x'.

    Equals hard cosine for identity weights; requires both vectors to have
    strictly positive weighted norm.
    """
    x = np.asarray(x, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    weights._check_dim(x.shape[0])
    if weights.form == "identity":
        num = x @ x2
        n1, n2 = x @ x, x2 @ x2
    elif weights.form == "diagonal":
        num = (x * weights.w) @ x2
        n1, n2 = (x * weights.w) @ x, (x2 * weights.w) @ x2
    else:
        wx = weights.w @ x2
        num = x @ wx
        n1, n2 = x @ weights.w @ x, x2 @ wx
    if n1 <= 0 or n2 <= 0:
        raise DataError("degenerate vector under W")
    return float(num / np.sqrt(n1 * n2))


@dataclass
class NeighborTriplets:
    """For each row n: its noisy label and those of its two nearest rows."""

    labels: np.ndarray      # (N, 3) int: (y_n, y_n1, y_n2)
    indices: np.ndarray     # (N, 2) int: row indices of the two neighbors

    def __post_init__(self):
        self.labels = _freeze(np.asarray(self.labels, dtype=np.int64))
        self.indices = _freeze(np.asarray(self.indices, dtype=np.int64))
        n = self.labels.shape[0]
        if self.labels.shape != (n, 3) or self.indices.shape != (n, 2):
            raise DataError("need one (label triple, index pair) per row")
        rows = np.arange(n)
        if np.any(self.indices[:, 0] == rows) or np.any(self.indices[:, 1] == rows) \
                or np.any(self.indices[:, 0] == self.indices[:, 1]):
            raise DataError("neighbor indices must be distinct from the row and each other")

    @property
    def n(self):
        return self.labels.shape[0]


def _weighted_rows(features, weights):
    """Rows scaled so plain inner products realize the weighted form.

    For diagonal W the map x -> x * sqrt(w) is exact; the full form keeps the
    explicit quadratic form instead (handled separately in the search).
    """
    if weights.form == "identity":
        return features
    return features * np.sqrt(weights.w)


def get_2nn_triplets(data, weights):
    """Exact 2-NN of every row under soft-cosine distance 1 - Sim_W.

    Returns the noisy-label triplets used by the consensus counter.  Ties
    break toward the lower row index; a row's own index is excluded.
    """
    x = data.features
    weights._check_dim(x.shape[1])
    n = x.shape[0]
    if n < 3:
        raise DataError("need at least 3 rows for 2-NN triplets")

    if weights.form == "full":
        gram_half = x @ weights.w          # (N, d)
        sq = np.einsum("ij,ij->i", gram_half, x)
        if np.any(sq <= 0):
            raise DataError("degenerate vector under W")
        norms = np.sqrt(sq)
        xa, xb = gram_half / norms[:, None], x / norms[:, None]
    else:
        xw = _weighted_rows(x, weights)
        sq = np.einsum("ij,ij->i", xw, xw)
        if np.any(sq <= 0):
            raise DataError("degenerate vector under W")
        xa = xb = xw / np.sqrt(sq)[:, None]

    indices = np.empty((n, 2), dtype=np.int64)
    m = min(16, n - 1)  # candidate pool; plenty unless many exact ties
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        sims = xa[start:stop] @ xb.T
        rows = np.arange(stop - start)
        sims[rows, np.arange(start, stop)] = -np.inf
        cand = np.argpartition(-sims, m - 1, axis=1)[:, :m]
        csims = np.take_along_axis(sims, cand, axis=1)
        # order candidates by similarity, breaking ties toward lower index
        order = np.lexsort((cand, -csims), axis=1)
        top = np.take_along_axis(cand, order[:, :2], axis=1)
        indices[start:stop] = top
        # a tie at the candidate boundary may hide an equal lower index
        # outside the pool; resolve those rows with a full stable sort
        second = sims[rows, top[:, 1]]
        unsafe = np.flatnonzero(second <= csims.min(axis=1))
        for r in unsafe:
            indices[start + r] = np.argsort(-sims[r], kind="stable")[:2]

    y = data.noisy_labels
    labels = np.column_stack([y, y[indices[:, 0]], y[indices[:, 1]]])
    return NeighborTriplets(labels, indices)


def clusterability_rate(data, weights):
    """Fraction of rows whose two nearest neighbors share the row's clean label."""
    if data.clean_labels is None:
        raise DataError("clusterability requires clean labels")
    trip = get_2nn_triplets(data, weights)
    c = data.clean_labels
    ok = (c[trip.indices[:, 0]] == c) & (c[trip.indices[:, 1]] == c)
    return float(ok.mean())


def dump_triplets_csv(triplets, path):
    """Debug dump: one row per point with neighbor indices and labels."""
    import csv
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "n1", "n2", "y_n", "y_n1", "y_n2"])
        for i in range(triplets.n):
            writer.writerow([i, *triplets.indices[i], *triplets.labels[i]])
