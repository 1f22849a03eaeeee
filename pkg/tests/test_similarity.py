import numpy as np
import pytest

import tmest as tm
from tmest.core import DataError
from tmest.similarity import (
    NeighborTriplets,
    SimilarityWeights,
    clusterability_rate,
    dump_triplets_csv,
    get_2nn_triplets,
    soft_cosine,
)

from conftest import two_blob_dataset

# three reference points: which of X1/X2 is closer to X3 depends on W
X1 = np.array([1.0, 0.0, 1.0])
X2 = np.array([0.0, 1.0, 0.0])
X3 = np.array([0.8, 1.0, 0.7])
W3 = np.array([[1.0, -0.2, -0.5], [-0.2, 1.0, 0.5], [-0.5, 0.5, 1.0]])


def test_hard_cosine_golden_values():
    w = SimilarityWeights.identity()
    assert soft_cosine(X1, X3, w) == pytest.approx(0.7268, abs=5e-4)
    assert soft_cosine(X2, X3, w) == pytest.approx(0.6852, abs=5e-4)


def test_diagonal_golden_values():
    w = SimilarityWeights.diagonal([1.0, 1.0, 0.1])
    assert soft_cosine(X1, X3, w) == pytest.approx(0.6383, abs=5e-4)
    assert soft_cosine(X2, X3, w) == pytest.approx(0.7695, abs=5e-4)
    # down-weighting the third axis flips which point is nearer to X3
    assert soft_cosine(X1, X3, w) < soft_cosine(X2, X3, w)


def test_full_matrix_golden_values():
    w = SimilarityWeights.full(W3)
    assert soft_cosine(X1, X3, w) == pytest.approx(0.7519, abs=5e-4)
    assert soft_cosine(X2, X3, w) == pytest.approx(0.8522, abs=5e-4)
    assert soft_cosine(X1, X3, w) < soft_cosine(X2, X3, w)


def test_identity_matches_plain_cosine():
    rng = np.random.default_rng(0)
    w = SimilarityWeights.identity()
    for _ in range(20):
        x, y = rng.normal(size=(2, 6))
        expect = x @ y / (np.linalg.norm(x) * np.linalg.norm(y))
        assert soft_cosine(x, y, w) == pytest.approx(expect, abs=1e-12)


def test_scale_invariance():
    w = SimilarityWeights.full(W3)
    base = soft_cosine(X1, X3, w)
    assert soft_cosine(3.7 * X1, X3, w) == pytest.approx(base, abs=1e-12)
    assert soft_cosine(X1, 0.01 * X3, w) == pytest.approx(base, abs=1e-12)


def test_self_similarity_is_one():
    for w in (SimilarityWeights.identity(),
              SimilarityWeights.diagonal([2.0, 1.0, 0.5]),
              SimilarityWeights.full(W3)):
        assert soft_cosine(X3, X3, w) == pytest.approx(1.0, abs=1e-12)


def test_degenerate_vector_rejected():
    z = np.zeros(3)
    with pytest.raises(DataError, match="degenerate"):
        soft_cosine(z, X1, SimilarityWeights.identity())
    # nonzero vector killed by a zero weight
    w = SimilarityWeights.diagonal([0.0, 0.0, 1.0])
    with pytest.raises(DataError, match="degenerate"):
        soft_cosine(np.array([1.0, 1.0, 0.0]), X1, w)


def test_asymmetric_full_matrix_rejected():
    bad = W3.copy()
    bad[0, 1] = 0.9
    with pytest.raises(DataError, match="symmetric"):
        SimilarityWeights.full(bad)


def test_dimension_mismatch():
    with pytest.raises(DataError):
        soft_cosine(X1, X3, SimilarityWeights.diagonal([1.0, 1.0]))


def _reference_2nn(x, weights):
    """O(N^2) reference: stable argsort of similarities, self excluded."""
    n = x.shape[0]
    if weights.form == "identity":
        w = np.eye(x.shape[1])
    elif weights.form == "diagonal":
        w = np.diag(weights.w)
    else:
        w = weights.w
    g = x @ w @ x.T
    norms = np.sqrt(np.diag(g))
    sims = g / np.outer(norms, norms)
    np.fill_diagonal(sims, -np.inf)
    return np.argsort(-sims, axis=1, kind="stable")[:, :2]


@pytest.mark.parametrize("seed,n,d", [(0, 50, 3), (1, 700, 5), (2, 1300, 8)])
def test_2nn_matches_reference(seed, n, d):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d))
    data = tm.Dataset(x, rng.integers(0, 3, n), 3)
    for weights in (SimilarityWeights.identity(),
                    SimilarityWeights.diagonal(rng.uniform(0.1, 1.0, d))):
        trip = get_2nn_triplets(data, weights)
        np.testing.assert_array_equal(trip.indices, _reference_2nn(x, weights))
        np.testing.assert_array_equal(trip.labels[:, 0], data.noisy_labels)
        np.testing.assert_array_equal(trip.labels[:, 1],
                                      data.noisy_labels[trip.indices[:, 0]])


def test_2nn_full_weight_matches_reference():
    rng = np.random.default_rng(3)
    n, d = 400, 3
    x = rng.normal(size=(n, d))
    data = tm.Dataset(x, rng.integers(0, 2, n), 2)
    r = rng.normal(size=(d, d))
    weights = SimilarityWeights.full(r.T @ r + 0.1 * np.eye(d))
    trip = get_2nn_triplets(data, weights)
    np.testing.assert_array_equal(trip.indices, _reference_2nn(x, weights))


def test_2nn_tie_breaks_to_lower_index():
    # exact duplicate rows force exact similarity ties; both the fast path
    # and the reference must then pick the lowest row indices
    rng = np.random.default_rng(4)
    base = rng.normal(size=(5, 4))
    which = rng.integers(0, 5, 300)
    x = base[which]
    data = tm.Dataset(x, rng.integers(0, 2, 300), 2)
    w = SimilarityWeights.identity()
    trip = get_2nn_triplets(data, w)
    # every duplicated row's neighbors are the two lowest other duplicates
    for i in range(300):
        dupes = np.flatnonzero(which == which[i])
        expect = [j for j in dupes if j != i][:2]
        assert trip.indices[i].tolist() == expect


def test_2nn_small_n_edge():
    x = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
    data = tm.Dataset(x, np.array([0, 0, 1]), 2)
    trip = get_2nn_triplets(data, SimilarityWeights.identity())
    assert trip.indices[0].tolist() == [1, 2]
    assert trip.labels[0].tolist() == [0, 0, 1]


def test_neighbor_triplets_distinctness():
    with pytest.raises(DataError, match="distinct"):
        NeighborTriplets(np.zeros((3, 3)), np.array([[0, 1], [0, 2], [0, 1]]))
    with pytest.raises(DataError, match="distinct"):
        NeighborTriplets(np.zeros((3, 3)), np.array([[1, 1], [0, 2], [0, 1]]))


def test_clusterability_separated_blobs():
    data = two_blob_dataset(0, n=600, sep=4.0)
    rate = clusterability_rate(data, SimilarityWeights.identity())
    assert rate > 0.95


def test_clusterability_requires_clean_labels():
    rng = np.random.default_rng(5)
    data = tm.Dataset(rng.normal(size=(20, 3)), rng.integers(0, 2, 20), 2)
    with pytest.raises(DataError):
        clusterability_rate(data, SimilarityWeights.identity())


def test_dump_triplets_csv(tmp_path):
    data = two_blob_dataset(1, n=30)
    trip = get_2nn_triplets(data, SimilarityWeights.identity())
    path = tmp_path / "trip.csv"
    dump_triplets_csv(trip, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "n,n1,n2,y_n,y_n1,y_n2"
    assert len(lines) == 31
    first = [int(v) for v in lines[1].split(",")]
    assert first[0] == 0
    assert first[1:3] == trip.indices[0].tolist()
    assert first[3:] == trip.labels[0].tolist()
