"""Complete-linkage grouping of variables on 1 - |correlation|."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import correlation


@dataclass(frozen=True)
class Merge:
    step: int
    left: int
    right: int
    height: float


@dataclass(frozen=True)
class ClusterAssignment:
    """Partition of variable indices.

    ``labels[j]`` is the cluster of variable ``j``; cluster ids are numbered by
    their smallest member. ``order`` is the processing order used by the
    block orthogonalization: larger clusters first, then by smallest member.
    """

    labels: np.ndarray
    order: tuple

    @property
    def n_clusters(self):
        return len(self.order)

    def members(self, cluster):
        return np.flatnonzero(self.labels == cluster)

    def blocks(self):
        """Member index arrays in processing order."""
        return [self.members(k) for k in self.order]

    def sizes(self):
        return np.bincount(self.labels, minlength=self.n_clusters)


def dissimilarity_matrix(R):
    R = np.asarray(R, dtype=float)
    if np.any(np.abs(R) > 1 + 1e-12):
        raise DomainError("correlation entries must lie in [-1, 1]")
    D = 1.0 - np.minimum(np.abs(R), 1.0)
    np.fill_diagonal(D, 0.0)
    return D


def assignment_from_groups(groups, n):
    groups = sorted((sorted(int(i) for i in g) for g in groups), key=lambda g: g[0])
    labels = np.empty(n, dtype=int)
    for k, g in enumerate(groups):
        labels[g] = k
    order = tuple(sorted(range(len(groups)), key=lambda k: (-len(groups[k]), groups[k][0])))
    return ClusterAssignment(labels=labels, order=order)


def complete_linkage(D, c=1):
    """Agglomerate until ``c`` clusters remain.

    Returns the assignment and the merge history. Merge identifiers follow the
    usual dendrogram convention: leaves are ``0..N-1`` and the cluster formed
    at step ``s`` is ``N + s``. Among equally close pairs the one whose
    smallest members are lexicographically smallest is merged first.
    """
    D = np.asarray(D, dtype=float)
    n = D.shape[0]
    if not 1 <= c <= n:
        raise DomainError(f"number of clusters must be in [1, {n}], got {c}")

    dist = D.copy()
    np.fill_diagonal(dist, np.inf)
    # slot i holds a live cluster until it is absorbed
    alive = np.ones(n, dtype=bool)
    members = [[i] for i in range(n)]
    node_id = list(range(n))
    merges = []
    for step in range(n - c):
        live = np.flatnonzero(alive)
        sub = dist[np.ix_(live, live)]
        best = sub.min()
        cand = np.argwhere(sub == best)
        lows = [(min(members[live[a]]), min(members[live[b]])) for a, b in cand]
        keyed = [(tuple(sorted(p)), k) for k, p in enumerate(lows)]
        _, pick = min(keyed)
        a, b = live[cand[pick][0]], live[cand[pick][1]]
        if min(members[a]) > min(members[b]):
            a, b = b, a
        merges.append(Merge(step, node_id[a], node_id[b], float(best)))
        merged = np.maximum(dist[a], dist[b])
        dist[a, :] = merged
        dist[:, a] = merged
        dist[a, a] = np.inf
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        alive[b] = False
        members[a] = members[a] + members[b]
        node_id[a] = n + step
    groups = [members[i] for i in np.flatnonzero(alive)]
    return assignment_from_groups(groups, n), merges


def complete_linkage_cluster(D, c):
    return complete_linkage(D, c)[0]


def cut_merges(merges, n, c):
    """Partition into ``c`` clusters obtained by replaying the first
    ``n - c`` merges of a full agglomeration history."""
    if not 1 <= c <= n:
        raise DomainError(f"number of clusters must be in [1, {n}], got {c}")
    groups = {i: [i] for i in range(n)}
    for mg in merges[: n - c]:
        groups[n + mg.step] = groups.pop(mg.left) + groups.pop(mg.right)
    return assignment_from_groups(groups.values(), n)


def cluster_variables(X_or_R, c, is_correlation=False):
    """Cluster the columns of ``X`` (or a correlation matrix) into ``c`` blocks."""
    R = np.asarray(X_or_R, dtype=float) if is_correlation else correlation(X_or_R)
    return complete_linkage_cluster(dissimilarity_matrix(R), c)
