"""Shared data model: datasets, transition matrices, configuration, reports.

All container types are frozen after construction (numpy buffers are made
read-only) so they can be shared across workers without copying.
"""

import csv
import json
from dataclasses import dataclass, field, asdict

import numpy as np

ROW_SUM_ATOL = 1e-9

VARIANTS = ("plain-hoc", "x-kl", "x-tv", "a-kl", "a-tv")
ACTIVATIONS = ("minmax", "log-minmax")


class DataError(ValueError):
    """Raised when an input file or matrix violates the data contract."""


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass
class Dataset:
    """N feature vectors with noisy labels, optionally paired with clean labels.

    features: (N, d) float array, finite entries only.
    noisy_labels / clean_labels: integer labels in [0, K).
    """

    features: np.ndarray
    noisy_labels: np.ndarray
    k: int
    clean_labels: np.ndarray | None = None
    ids: list | None = None

    def __post_init__(self):
        self.features = _freeze(np.asarray(self.features, dtype=np.float64))
        self.noisy_labels = _freeze(np.asarray(self.noisy_labels, dtype=np.int64))
        if self.clean_labels is not None:
            self.clean_labels = _freeze(np.asarray(self.clean_labels, dtype=np.int64))
        if self.features.ndim != 2 or self.features.shape[1] < 1:
            raise DataError("features must be a 2-d matrix with d >= 1")
        if not np.all(np.isfinite(self.features)):
            raise DataError("non-finite feature")
        n = self.features.shape[0]
        if n < 3:
            raise DataError(f"need at least 3 rows, got {n}")
        if self.k < 2:
            raise DataError(f"class count must be >= 2, got {self.k}")
        for name, labels in (("noisy", self.noisy_labels), ("clean", self.clean_labels)):
            if labels is None:
                continue
            if labels.shape != (n,):
                raise DataError(f"{name} labels must have length N={n}")
            if labels.min() < 0 or labels.max() >= self.k:
                raise DataError(f"{name} label out of range [0, {self.k})")
        if self.ids is not None and len(self.ids) != n:
            raise DataError("ids must have length N")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def with_features(self, features):
        """Copy of this dataset with the feature matrix replaced."""
        return Dataset(features, self.noisy_labels, self.k,
                       clean_labels=self.clean_labels, ids=self.ids)

    def with_noisy_labels(self, noisy_labels):
        return Dataset(self.features, noisy_labels, self.k,
                       clean_labels=self.clean_labels, ids=self.ids)


def load_dataset(path, schema=None, k=None):
    """Read a dataset from CSV.

    Expected columns: ``f0..f{d-1}``, ``noisy_label`` and optionally
    ``clean_label`` and ``id``.  ``schema`` maps these canonical names to
    the actual column names in the file.  K is inferred as 1 + max label
    unless given.
    """
    schema = schema or {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file")
        rows = list(reader)

    def col(name):
        return schema.get(name, name)

    noisy_col = col("noisy_label")
    clean_col = col("clean_label")
    id_col = col("id")
    header = set(rows[0].keys()) if rows else set(reader.fieldnames)
    if noisy_col not in header:
        raise DataError(f"missing column '{noisy_col}'")

    feat_cols = []
    i = 0
    while col(f"f{i}") in header:
        feat_cols.append(col(f"f{i}"))
        i += 1
    if not feat_cols:
        raise DataError("no feature columns found (expected f0, f1, ...)")

    try:
        features = np.array([[float(r[c]) for c in feat_cols] for r in rows])
        noisy = np.array([int(r[noisy_col]) for r in rows])
    except ValueError as exc:
        raise DataError(f"failed to parse {path}: {exc}") from None
    if not np.all(np.isfinite(features)):
        raise DataError("non-finite feature")
    clean = None
    if clean_col in header:
        clean = np.array([int(r[clean_col]) for r in rows])
    ids = [r[id_col] for r in rows] if id_col in header else None

    if k is None:
        k = int(noisy.max()) + 1 if clean is None else int(max(noisy.max(), clean.max())) + 1
        k = max(k, 2)
    return Dataset(features, noisy, k, clean_labels=clean, ids=ids)


def save_dataset(data, path):
    """Write a dataset to CSV with the canonical column layout."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = [f"f{i}" for i in range(data.d)] + ["noisy_label"]
        if data.clean_labels is not None:
            header.append("clean_label")
        if data.ids is not None:
            header.append("id")
        writer.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.features[i]] + [int(data.noisy_labels[i])]
            if data.clean_labels is not None:
                row.append(int(data.clean_labels[i]))
            if data.ids is not None:
                row.append(data.ids[i])
            writer.writerow(row)


@dataclass
class TransitionMatrix:
    """K x K row-stochastic matrix; t[i, j] = P(noisy=j | clean=i)."""

    k: int
    t: np.ndarray
    p: np.ndarray | None = None

    def __post_init__(self):
        self.t = _freeze(np.asarray(self.t, dtype=np.float64))
        if self.t.shape != (self.k, self.k):
            raise DataError(f"expected a {self.k}x{self.k} matrix, got {self.t.shape}")
        if np.any(self.t < -ROW_SUM_ATOL) or np.any(self.t > 1 + ROW_SUM_ATOL):
            raise DataError("transition entries must lie in [0, 1]")
        bad = np.abs(self.t.sum(axis=1) - 1.0) > ROW_SUM_ATOL
        if np.any(bad):
            raise DataError(f"row sum deviates from 1 in rows {np.flatnonzero(bad).tolist()}")
        if self.p is not None:
            self.p = _freeze(np.asarray(self.p, dtype=np.float64))
            if self.p.shape != (self.k,):
                raise DataError("prior must have length K")
            if np.any(self.p < -ROW_SUM_ATOL) or abs(self.p.sum() - 1.0) > ROW_SUM_ATOL:
                raise DataError("prior must be a probability vector")

    def to_json(self):
        obj = {"k": self.k, "t": self.t.tolist()}
        if self.p is not None:
            obj["p"] = self.p.tolist()
        return obj

    @classmethod
    def from_json(cls, obj):
        return cls(int(obj["k"]), np.array(obj["t"]),
                   p=np.array(obj["p"]) if obj.get("p") is not None else None)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def validate_transition(t, p=None):
    """Check row-stochasticity of a square matrix and wrap it.

    Entries are returned unchanged; a row sum off by more than 1e-6 or a
    negative entry is an error.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DataError("transition matrix must be square")
    return TransitionMatrix(t.shape[0], t, p=p)


@dataclass
class NoiseRatePair:
    """Binary noise rates e1 = P(noisy=2|clean=1), e2 = P(noisy=1|clean=2)."""

    e1: float
    e2: float

    def require_estimable(self):
        if self.e1 < 0 or self.e2 < 0:
            raise DataError("noise rates must be nonnegative")
        if self.e1 + self.e2 >= 1:
            raise DataError(f"need e1 + e2 < 1, got {self.e1 + self.e2}")


@dataclass
class OptimizerConfig:
    step_size: float = 0.1
    max_iters: int = 3000
    restarts: int = 10
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.step_size <= 0:
            raise DataError("step_size must be positive")
        if self.max_iters < 1:
            raise DataError("max_iters must be >= 1")


@dataclass
class EstimatorConfig:
    variant: str = "plain-hoc"
    bins: int = 15
    activation: str = "minmax"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    eigen_floor: float = 1e-10

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DataError(f"unknown variant '{self.variant}' (choose from {VARIANTS})")
        if self.activation not in ACTIVATIONS:
            raise DataError(f"unknown activation '{self.activation}'")
        if self.bins < 2:
            raise DataError("bins must be >= 2")

    def to_json(self):
        return asdict(self)


# Stage names used to derive independent, reproducible RNG streams from the
# single run seed.
_STAGES = ("noise", "optimizer", "training", "synthesis")


def stage_rng(seed, stage):
    """Deterministic per-stage generator derived from the global seed."""
    if stage not in _STAGES:
        raise ValueError(f"unknown stage '{stage}'")
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, _STAGES.index(stage)])
    return np.random.default_rng(ss)


@dataclass
class Report:
    """Everything a single estimation run produces."""

    estimated_t: TransitionMatrix
    consensus: "object"  # ConsensusStatistics; kept loose to avoid an import cycle
    weights: object | None = None  # WeightVector
    error: float | None = None
    converged: bool = True
    config_echo: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.error is not None and not (0.0 <= self.error <= 1.0):
            raise DataError(f"error must lie in [0, 1], got {self.error}")

    def to_json(self):
        obj = {
            "estimated_t": self.estimated_t.to_json(),
            "consensus": self.consensus.to_json() if self.consensus is not None else None,
            "weights": self.weights.to_json() if self.weights is not None else None,
            "error": self.error,
            "converged": self.converged,
            "config_echo": self.config_echo,
            "timings": self.timings,
        }
        return obj

    @classmethod
    def from_json(cls, obj):
        from .hoc import ConsensusStatistics
        from .infotheory import WeightVector
        return cls(
            estimated_t=TransitionMatrix.from_json(obj["estimated_t"]),
            consensus=ConsensusStatistics.from_json(obj["consensus"]) if obj.get("consensus") else None,
            weights=WeightVector.from_json(obj["weights"]) if obj.get("weights") else None,
            error=obj.get("error"),
            converged=obj.get("converged", True),
            config_echo=obj.get("config_echo", {}),
            timings=obj.get("timings", {}),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
