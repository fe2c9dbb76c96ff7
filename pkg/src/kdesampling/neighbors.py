"""Exact brute-force Euclidean nearest-neighbor search.

Ties in distance are broken by ascending row index everywhere, so results
never depend on sort stability or platform.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError, ShapeError

__all__ = [
    "NeighborIndex",
    "knn",
    "knn_batch",
    "pairwise_distances",
    "avg_distance_to_k_nearest",
    "avg_distances_to_k_nearest",
]


def pairwise_distances(A, B):
    """Euclidean distance matrix between rows of ``A`` (m x d) and ``B`` (n x d).

    Computed from explicit differences rather than the ``|a|^2 + |b|^2 - 2ab``
    expansion so that duplicates are at distance exactly 0.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ShapeError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    out = np.empty((A.shape[0], B.shape[0]))
    # chunk rows to bound the (m, n, d) temporary
    step = max(1, int(2_000_000 // max(1, B.shape[0] * B.shape[1])))
    for s in range(0, A.shape[0], step):
        diff = A[s:s + step, None, :] - B[None, :, :]
        out[s:s + step] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return out


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    data: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        X = np.array(self.data, dtype=float, copy=True)
        if X.ndim != 2 or X.shape[0] < 1:
            raise ShapeError(f"index data must be a nonempty n x d matrix, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("index data contains non-finite values")
        if self.metric != "euclidean":
            raise ValueError(f"unsupported metric {self.metric!r}")
        X.setflags(write=False)
        object.__setattr__(self, "data", X)

    @property
    def n(self):
        return self.data.shape[0]


def _k_smallest(dist_row, k, exclude=None):
    """Indices of the k smallest entries, ties by index, skipping ``exclude``."""
    n = dist_row.shape[0]
    order = np.lexsort((np.arange(n), dist_row))
    if exclude is not None:
        order = order[order != exclude]
    return order[:k]


def knn(index, query, k, exclude_self_at=None):
    """``k`` nearest rows to ``query`` as ``[(row, distance), ...]``."""
    q = np.asarray(query, dtype=float).ravel()
    if q.shape[0] != index.data.shape[1]:
        raise ShapeError(f"query has dimension {q.shape[0]}, index has {index.data.shape[1]}")
    candidates = index.n - (1 if exclude_self_at is not None else 0)
    if not 1 <= k <= candidates:
        raise ArgumentError(f"k={k} must lie in [1, {candidates}]")
    dist = pairwise_distances(q[None, :], index.data)[0]
    rows = _k_smallest(dist, k, exclude_self_at)
    return [(int(r), float(dist[r])) for r in rows]


def knn_batch(index, queries, k, exclude_self=False):
    """Row indices (m x k) and distances (m x k) of each query's k nearest.

    With ``exclude_self`` the i-th query is assumed to be row i of the index
    and that row is skipped.
    """
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != index.data.shape[1]:
        raise ShapeError(f"queries have dimension {Q.shape[1]}, index has {index.data.shape[1]}")
    candidates = index.n - (1 if exclude_self else 0)
    if not 1 <= k <= candidates:
        raise ArgumentError(f"k={k} must lie in [1, {candidates}]")
    dist = pairwise_distances(Q, index.data)
    cols = np.arange(index.n)
    rows = np.empty((Q.shape[0], k), dtype=np.int64)
    for i in range(Q.shape[0]):
        d = dist[i]
        if exclude_self:
            d = d.copy()
            d[i] = np.inf
        # partition first, then exact (distance, index) order on a small slice
        m = min(index.n, k + 1 + (1 if exclude_self else 0))
        part = np.argpartition(d, m - 1)[:m] if m < index.n else cols
        cutoff = d[part].max()
        cand = np.flatnonzero(d <= cutoff)
        if exclude_self:
            cand = cand[cand != i]
        order = cand[np.lexsort((cand, d[cand]))]
        rows[i] = order[:k]
    return rows, np.take_along_axis(dist, rows, axis=1)


def avg_distances_to_k_nearest(points, targets, k):
    """For each row of ``points``: mean distance to its ``k`` nearest ``targets``."""
    T = np.atleast_2d(np.asarray(targets, dtype=float))
    if not 1 <= k <= T.shape[0]:
        raise ArgumentError(f"k={k} must lie in [1, {T.shape[0]}]")
    dist = pairwise_distances(points, T)
    part = np.partition(dist, k - 1, axis=1)[:, :k]
    return np.sort(part, axis=1).mean(axis=1)


def avg_distance_to_k_nearest(point, targets, k):
    """Mean Euclidean distance from ``point`` to its ``k`` nearest ``targets``."""
    p = np.asarray(point, dtype=float).ravel()
    return float(avg_distances_to_k_nearest(p[None, :], targets, k)[0])
