"""f-mutual information between scalar features and labels, the diagonal
weight construction, and the KL order-preservation bounds.

MI is computed with a plug-in histogram estimator: the feature column is
discretized into equal-frequency bins and the discrete f-divergence between
the empirical joint and the product of marginals is evaluated in closed form.
All logarithms are base 2.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import DataError, _freeze

WEIGHT_FLOOR = 1e-3   # smallest allowed weight after min-max normalization
LOG_MI_FLOOR = 1e-6   # floor before taking log2 of an MI value

# Divergences the estimator knows how to evaluate in closed form.  The
# remaining named kinds exist so callers get a clear "not implemented" rather
# than a typo error.
class FDivergenceKind(Enum):
    KL = "kl"
    TV = "tv"
    JENSEN_SHANNON = "jensen-shannon"
    SQUARED_HELLINGER = "squared-hellinger"
    PEARSON_CHI2 = "pearson-chi2"
    NEYMAN_CHI2 = "neyman-chi2"
    REVERSE_KL = "reverse-kl"


IMPLEMENTED_KINDS = (FDivergenceKind.KL, FDivergenceKind.TV)


def equal_frequency_bins(column, bins):
    """Assign each value to one of <= `bins` quantile bins; ties merge bins."""
    edges = np.quantile(column, np.linspace(0.0, 1.0, bins + 1))
    interior = np.unique(edges)[1:-1]
    return np.searchsorted(interior, column, side="right")


def estimate_fmi(column, labels, kind=FDivergenceKind.TV, bins=15):
    """Plug-in f-MI between a scalar feature column and integer labels.

    KL returns classical mutual information in bits; TV returns the total
    variation between the empirical joint and the marginal product, which
    lies in [0, 1].  A constant column (or constant labels) gives 0.
    """
    if kind not in IMPLEMENTED_KINDS:
        raise NotImplementedError(f"divergence {kind.value} is not implemented")
    column = np.asarray(column, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if column.shape != labels.shape or column.ndim != 1:
        raise DataError("column and labels must be 1-d and equally long")
    if column.shape[0] < bins:
        raise DataError(f"need at least bins={bins} samples")

    b = equal_frequency_bins(column, bins)
    nb = int(b.max()) + 1
    ny = int(labels.max()) + 1
    joint = np.bincount(b * ny + labels, minlength=nb * ny).reshape(nb, ny)
    joint = joint / joint.sum()
    prod = np.outer(joint.sum(axis=1), joint.sum(axis=0))

    if kind is FDivergenceKind.TV:
        return 0.5 * float(np.abs(joint - prod).sum())
    nz = joint > 0
    return float(np.sum(joint[nz] * np.log2(joint[nz] / prod[nz])))


@dataclass
class MIEstimate:
    """Per-dimension f-MI values for one dataset."""

    per_dim: np.ndarray
    kind: FDivergenceKind
    bins: int

    def __post_init__(self):
        self.per_dim = _freeze(np.asarray(self.per_dim, dtype=np.float64))
        if self.per_dim.ndim != 1 or self.per_dim.size == 0:
            raise DataError("per_dim must be a non-empty vector")
        if not np.all(np.isfinite(self.per_dim)) or np.any(self.per_dim < 0):
            raise DataError("MI values must be finite and nonnegative")


def estimate_fmi_per_dim(features, labels, kind=FDivergenceKind.TV, bins=15):
    """f-MI of every feature column against the labels."""
    vals = [estimate_fmi(features[:, j], labels, kind, bins)
            for j in range(features.shape[1])]
    return MIEstimate(np.array(vals), kind, bins)


@dataclass
class WeightVector:
    """Per-dimension similarity weights in (0, 1], max entry exactly 1."""

    w: np.ndarray
    activation: str = "minmax"

    def __post_init__(self):
        self.w = _freeze(np.asarray(self.w, dtype=np.float64))
        if self.w.min() <= 0 or abs(self.w.max() - 1.0) > 1e-12:
            raise DataError("weights must lie in (0, 1] with max exactly 1")

    def to_json(self):
        return {"w": self.w.tolist(), "activation": self.activation}

    @classmethod
    def from_json(cls, obj):
        return cls(np.array(obj["w"]), obj.get("activation", "minmax"))


def build_weights(mi, activation="minmax"):
    """Turn per-dimension MI into weights via an order-preserving activation.

    minmax rescales MI to (0, 1] with a small positive floor; log-minmax
    takes log2 first (floored at LOG_MI_FLOOR), which spreads out small MI
    values.  Uniform MI yields uniform weights.
    """
    vals = mi.per_dim
    if activation == "log-minmax":
        vals = np.log2(np.maximum(vals, LOG_MI_FLOOR))
    elif activation != "minmax":
        raise DataError(f"unknown activation '{activation}'")
    lo, hi = vals.min(), vals.max()
    if hi - lo <= 0:
        w = np.ones_like(vals)
    else:
        w = np.maximum(WEIGHT_FLOOR, (vals - lo) / (hi - lo))
        w = w / w.max()
    return WeightVector(w, activation)


def _h2(e):
    """Binary entropy in bits."""
    if e <= 0 or e >= 1:
        return 0.0
    return -e * math.log2(e) - (1 - e) * math.log2(1 - e)


def _xlog2x(x):
    return x * math.log2(x) if x > 0 else 0.0


def kl_order_gap(rates):
    """Order-preservation threshold for KL mutual information, in bits.

    With e the larger rate and delta = smaller/larger, the threshold is
    e * [delta*log2(delta) - (1+delta)*log2(1+delta)] + H2(e); it is 0 at
    zero noise and reduces to H2(e) - 2e for symmetric noise.
    """
    rates.require_estimable()
    e = max(rates.e1, rates.e2)
    if e == 0:
        return 0.0
    delta = min(rates.e1, rates.e2) / e
    return e * (_xlog2x(delta) - (1 + delta) * math.log2(1 + delta)) + _h2(e)


def kl_noise_bias(beta, rates):
    """Noise-induced bias of the KL mutual information at mixing level beta.

    beta in [0, 1) is the clean class-1 posterior mass at a feature value;
    the bias vanishes for all beta when there is no noise.
    """
    rates.require_estimable()
    if not 0.0 <= beta < 1.0:
        raise DataError(f"beta must lie in [0, 1), got {beta}")
    e1, e2 = rates.e1, rates.e2
    q = (1 - e1 - e2) * beta + e2
    return (_xlog2x(q) + _xlog2x(1 - q)
            - (1 - e1 - e2) * (_xlog2x(beta) + _xlog2x(1 - beta)))


def kl_bias_argmax(rates):
    """beta maximizing kl_noise_bias; the bias increases up to it and
    decreases after."""
    if rates.e1 + rates.e2 == 0:
        return 0.0
    return rates.e2 / (rates.e1 + rates.e2)


def practical_gap(rates, beta_lo=1 / 6, beta_hi=5 / 6):
    """Max minus min of kl_noise_bias over a restricted beta range.

    The default range corresponds to clean posterior odds between 1/5 and 5.
    The bias is unimodal with its peak at e2/(e1+e2), so the extremes sit at
    the peak (if inside the range) and the endpoints.
    """
    if not (0.0 <= beta_lo <= beta_hi < 1.0):
        raise DataError("need 0 <= beta_lo <= beta_hi < 1")
    vals = [kl_noise_bias(beta_lo, rates), kl_noise_bias(beta_hi, rates)]
    peak = kl_bias_argmax(rates)
    if beta_lo <= peak <= beta_hi:
        vals.append(kl_noise_bias(peak, rates))
    return max(vals) - min(vals)
