import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.cluster import hierarchy
from scipy.spatial.distance import squareform

from crsir.clustering import (
    assignment_from_groups,
    cluster_variables,
    complete_linkage,
    complete_linkage_cluster,
    cut_merges,
    dissimilarity_matrix,
)
from crsir.errors import DomainError


def naive_complete_linkage(D, c):
    """Recompute every inter-cluster distance from the raw matrix at each step."""
    n = D.shape[0]
    clusters = [[i] for i in range(n)]
    heights = []
    while len(clusters) > c:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            d = max(D[i, j] for i in clusters[a] for j in clusters[b])
            key = (d, tuple(sorted((min(clusters[a]), min(clusters[b])))))
            if best is None or key < best[0]:
                best = (key, a, b)
        (d, _), a, b = best
        heights.append(d)
        merged = clusters[a] + clusters[b]
        clusters = [g for k, g in enumerate(clusters) if k not in (a, b)] + [merged]
    return {frozenset(g) for g in clusters}, heights


def partition(assignment):
    return {frozenset(assignment.members(k).tolist()) for k in range(assignment.n_clusters)}


def random_corr(rng, n, T=40):
    X = rng.standard_normal((T, n)) @ rng.standard_normal((n, n))
    return np.corrcoef(X, rowvar=False)


def test_dissimilarity_examples():
    R = np.array([[1.0, -1.0, 0.9], [-1.0, 1.0, 0.0], [0.9, 0.0, 1.0]])
    D = dissimilarity_matrix(R)
    assert D[0, 1] == 0.0
    assert D[0, 2] == pytest.approx(0.1)
    assert D[1, 2] == 1.0
    assert np.all(np.diag(D) == 0)
    with pytest.raises(DomainError):
        dissimilarity_matrix(np.array([[1.0, 1.5], [1.5, 1.0]]))


def test_four_variable_example():
    R = np.eye(4)
    R[0, 1] = R[1, 0] = 0.95
    R[2, 3] = R[3, 2] = 0.90
    R[0, 2] = R[2, 0] = 0.05
    R[1, 3] = R[3, 1] = -0.03
    a = complete_linkage_cluster(dissimilarity_matrix(R), 2)
    assert partition(a) == {frozenset({0, 1}), frozenset({2, 3})}
    expected, _ = naive_complete_linkage(dissimilarity_matrix(R), 2)
    assert partition(a) == expected


def test_trivial_cuts():
    rng = np.random.default_rng(0)
    D = dissimilarity_matrix(random_corr(rng, 5))
    assert complete_linkage_cluster(D, 5).n_clusters == 5
    one = complete_linkage_cluster(D, 1)
    assert partition(one) == {frozenset(range(5))}
    for bad in (0, 6):
        with pytest.raises(DomainError):
            complete_linkage_cluster(D, bad)


def test_processing_order():
    a = assignment_from_groups([[4], [0, 3], [1, 2, 5], [6, 7]], 8)
    assert a.labels.tolist() == [0, 1, 1, 0, 2, 1, 3, 3]
    assert a.order == (1, 0, 3, 2)
    assert [b.tolist() for b in a.blocks()] == [[1, 2, 5], [0, 3], [6, 7], [4]]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8))
def test_matches_naive_oracle(seed, n):
    rng = np.random.default_rng(seed)
    D = dissimilarity_matrix(random_corr(rng, n))
    for c in range(1, n + 1):
        a, merges = complete_linkage(D, c)
        expected, heights = naive_complete_linkage(D, c)
        assert partition(a) == expected
        assert [m.height for m in merges] == pytest.approx(heights)


def test_matches_scipy_when_untied():
    rng = np.random.default_rng(11)
    for _ in range(20):
        D = dissimilarity_matrix(random_corr(rng, 9))
        Z = hierarchy.linkage(squareform(D, checks=False), method="complete")
        _, merges = complete_linkage(D, 1)
        assert [m.height for m in merges] == pytest.approx(Z[:, 2].tolist())
        for c in (2, 3, 5):
            labels = hierarchy.fcluster(Z, c, criterion="maxclust")
            groups = {frozenset(np.flatnonzero(labels == k).tolist()) for k in set(labels)}
            assert partition(complete_linkage_cluster(D, c)) == groups


def test_tie_break_is_lexicographic():
    D = np.ones((4, 4)) * 0.5
    np.fill_diagonal(D, 0.0)
    _, merges = complete_linkage(D, 1)
    assert (merges[0].left, merges[0].right) == (0, 1)
    # {0,1} is now tied with every singleton; its smallest member wins
    assert (merges[1].left, merges[1].right) == (4, 2)
    assert (merges[2].left, merges[2].right) == (5, 3)


def test_cut_merges_replays_history():
    rng = np.random.default_rng(3)
    D = dissimilarity_matrix(random_corr(rng, 7))
    _, merges = complete_linkage(D, 1)
    for c in range(1, 8):
        assert partition(cut_merges(merges, 7, c)) == partition(complete_linkage_cluster(D, c))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 8), st.integers(1, 8))
def test_permutation_invariance(seed, n, c):
    c = min(c, n)
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((60, n)) @ rng.standard_normal((n, n))
    perm = rng.permutation(n)
    base = partition(cluster_variables(X, c))
    moved = partition(cluster_variables(X[:, perm], c))
    mapped = {frozenset(int(perm[i]) for i in g) for g in moved}
    assert mapped == base


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 9))
def test_heights_non_decreasing(seed, n):
    rng = np.random.default_rng(seed)
    _, merges = complete_linkage(dissimilarity_matrix(random_corr(rng, n)), 1)
    h = [m.height for m in merges]
    assert all(b >= a for a, b in zip(h, h[1:]))


def test_scaling_leaves_partition_unchanged():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((80, 6)) @ rng.standard_normal((6, 6))
    scale = np.array([1.0, -3.0, 0.01, 7.0, -0.5, 100.0])
    for c in range(1, 7):
        assert partition(cluster_variables(X, c)) == partition(cluster_variables(X * scale, c))


def test_assignment_invariants():
    rng = np.random.default_rng(6)
    a = cluster_variables(rng.standard_normal((50, 9)), 4)
    assert a.sizes().sum() == 9
    assert np.all(a.sizes() > 0)
    assert sorted(a.order) == [0, 1, 2, 3]
