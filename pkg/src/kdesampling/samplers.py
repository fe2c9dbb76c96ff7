"""Resampling strategies: ROS, SMOTE, ADASYN, NearMiss-1 and KDE oversampling.

Each strategy exists twice: as a plain function over minority/majority
matrices, and as an estimator with ``fit_resample(X, y)`` in the style of
imbalanced-learn. :func:`resample` applies a :class:`ResampleRequest` to a
:class:`~kdesampling.dataset.Dataset`.

Labels follow the dataset convention: ``1`` is the minority class.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_X_y

from . import kde as kde_mod
from ._rng import as_generator
from .dataset import NEGATIVE, POSITIVE, Dataset, class_counts
from .exceptions import ArgumentError, DataError, FitError
from .neighbors import NeighborIndex, avg_distances_to_k_nearest, knn_batch

__all__ = [
    "STRATEGIES",
    "ResampleRequest",
    "ResampleResult",
    "ros",
    "smote",
    "adasyn",
    "adasyn_difficulty",
    "adasyn_allocation",
    "nearmiss",
    "kde_oversample",
    "fit_kde_with_jitter",
    "resample",
    "RandomOverSampler",
    "SMOTE",
    "ADASYN",
    "NearMiss",
    "KDEOverSampler",
    "make_sampler",
]

logger = logging.getLogger(__name__)

STRATEGIES = ("ros", "smote", "adasyn", "nearmiss", "kde")
DEFAULT_K = {"smote": 5, "adasyn": 5, "nearmiss": 3}
JITTER_SCALE = 1e-9


def ros(minority, n_new, rng=None):
    """Random oversampling: ``n_new`` rows copied uniformly with replacement.

    Returns ``(rows, source_indices)``.
    """
    P = np.asarray(minority, dtype=float)
    if P.shape[0] < 1:
        raise DataError("random oversampling needs at least one minority row")
    rng = as_generator(rng)
    src = rng.integers(0, P.shape[0], size=n_new)
    return P[src].copy(), src


def _interpolate(P, seeds, neighbor_rows, rng):
    """SMOTE step for each seed: pick one of its neighbors and a t in [0, 1]."""
    k = neighbor_rows.shape[1]
    picks = rng.integers(0, k, size=seeds.shape[0])
    t = rng.random(seeds.shape[0])
    nbrs = neighbor_rows[seeds, picks]
    new = P[seeds] + t[:, None] * (P[nbrs] - P[seeds])
    return new, nbrs, t


def _check_smote_k(m, k):
    if m < 2:
        raise DataError(f"SMOTE-style interpolation needs at least 2 minority rows, got {m}")
    if not 1 <= k <= m - 1:
        raise ArgumentError(f"k={k} must lie in [1, {m - 1}] for {m} minority rows")


def smote(minority, n_new, k=5, rng=None):
    """SMOTE interpolation toward a random one of the k nearest minority rows.

    Each new row is ``p + t * (p_k - p)``, t ~ U[0, 1], so it lies on the
    segment from ``p`` to ``p_k``. Returns ``(rows, provenance)`` where
    provenance holds ``source``, ``neighbor`` and ``t`` arrays.
    """
    P = np.asarray(minority, dtype=float)
    m = P.shape[0]
    _check_smote_k(m, k)
    rng = as_generator(rng)
    nbr_rows, _ = knn_batch(NeighborIndex(P), P, k, exclude_self=True)
    seeds = rng.integers(0, m, size=n_new)
    new, nbrs, t = _interpolate(P, seeds, nbr_rows, rng)
    return new, {"source": seeds, "neighbor": nbrs, "t": t}


def adasyn_difficulty(minority, majority, k=5):
    """Fraction of majority rows among each minority row's k nearest neighbors.

    Neighbors are searched in the combined set ``[minority; majority]``
    excluding the row itself.
    """
    P = np.asarray(minority, dtype=float)
    N = np.asarray(majority, dtype=float).reshape(-1, P.shape[1])
    m = P.shape[0]
    combined = np.vstack([P, N])
    if not 1 <= k <= combined.shape[0] - 1:
        raise ArgumentError(f"k={k} must lie in [1, {combined.shape[0] - 1}]")
    rows, _ = knn_batch(NeighborIndex(combined), P, k, exclude_self=True)
    return np.count_nonzero(rows >= m, axis=1) / k


def adasyn_allocation(r, n_new):
    """Split ``n_new`` across seeds in proportion to ``r`` (largest remainder).

    Leftover units go to the largest fractional parts, ties to the lower
    index. All-zero ``r`` falls back to a uniform split with a warning.
    """
    r = np.asarray(r, dtype=float)
    total = r.sum()
    if total <= 0:
        warnings.warn("no minority row has a majority neighbor; ADASYN falls back to "
                      "uniform allocation", RuntimeWarning, stacklevel=2)
        r = np.ones_like(r)
        total = r.sum()
    quota = r / total * n_new
    alloc = np.floor(quota).astype(np.int64)
    short = int(n_new - alloc.sum())
    if short > 0:
        frac = quota - alloc
        order = np.lexsort((np.arange(r.size), -frac))
        alloc[order[:short]] += 1
    return alloc


def adasyn(minority, majority, n_new, k=5, rng=None):
    """ADASYN: SMOTE with seeds weighted by local majority density.

    Returns ``(rows, provenance)``; provenance also carries the difficulty
    ratios ``r`` and the per-seed ``allocation``.
    """
    P = np.asarray(minority, dtype=float)
    m = P.shape[0]
    if m < 2:
        raise DataError(f"ADASYN needs at least 2 minority rows, got {m}")
    rng = as_generator(rng)
    r = adasyn_difficulty(P, majority, k)
    alloc = adasyn_allocation(r, n_new)
    k_min = min(k, m - 1)
    nbr_rows, _ = knn_batch(NeighborIndex(P), P, k_min, exclude_self=True)
    seeds = np.repeat(np.arange(m), alloc)
    new, nbrs, t = _interpolate(P, seeds, nbr_rows, rng)
    return new, {"source": seeds, "neighbor": nbrs, "t": t, "r": r, "allocation": alloc}


def nearmiss(majority, minority, n_keep, k=3):
    """NearMiss-1: keep majority rows closest on average to their k nearest minority rows.

    Returns the sorted-by-score majority row indices (ties by row index).
    """
    N = np.asarray(majority, dtype=float)
    M = N.shape[0]
    if not 0 <= n_keep <= M:
        raise ArgumentError(f"n_keep={n_keep} must lie in [0, {M}]")
    scores = avg_distances_to_k_nearest(N, minority, k)
    order = np.lexsort((np.arange(M), scores))
    return order[:n_keep]


def fit_kde_with_jitter(points):
    """Scott-rule KDE fit; on a singular covariance retry once with jitter.

    The jitter adds ``1e-9 * trace(S) / d`` to the diagonal of the sample
    covariance before the Scott factor is applied.
    """
    try:
        return kde_mod.fit(points), False
    except FitError as exc:
        X = np.asarray(points, dtype=float)
        n, d = X.shape
        S = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
        eps = JITTER_SCALE * np.trace(S) / d
        if not eps > 0:
            raise
        logger.warning("KDE fit failed (%s); retrying with jitter %.3g", exc, eps)
        H = kde_mod.scott_factor(n, d) ** 2 * (S + eps * np.eye(d))
        return kde_mod.fit(X, kde_mod.BandwidthRule.fixed(H)), True


def kde_oversample(minority, n_new, rng=None):
    """Draw ``n_new`` rows from a Scott-rule Gaussian KDE of the minority rows.

    Returns ``(rows, provenance)``; ``provenance["source"]`` is the kernel center
    of every row.
    """
    P = np.asarray(minority, dtype=float)
    if P.shape[0] < 2:
        raise DataError(f"KDE oversampling needs at least 2 minority rows, got {P.shape[0]}")
    model, jittered = fit_kde_with_jitter(P)
    if n_new == 0:
        return np.empty((0, P.shape[1])), {"source": np.empty(0, dtype=np.int64),
                                           "jittered": jittered}
    new, centers = kde_mod.sample(model, n_new, as_generator(rng))
    return new, {"source": centers, "jittered": jittered}


@dataclass(frozen=True)
class ResampleRequest:
    strategy: str = "kde"
    target_ratio: float = 1.0
    k_neighbors: int = None
    seed: object = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ArgumentError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if not self.target_ratio >= 1.0:
            raise ArgumentError(f"target_ratio must be >= 1, got {self.target_ratio}")
        if self.k_neighbors is not None and self.k_neighbors < 1:
            raise ArgumentError(f"k_neighbors must be >= 1, got {self.k_neighbors}")

    @property
    def k(self):
        return self.k_neighbors if self.k_neighbors is not None else DEFAULT_K.get(self.strategy)


@dataclass(frozen=True, eq=False)
class ResampleResult:
    """Resampled dataset plus bookkeeping.

    For oversamplers ``synthetic_mask`` marks appended rows. For NearMiss it
    marks the retained majority rows.
    """

    dataset: object
    synthetic_mask: np.ndarray
    provenance: dict = field(default_factory=dict)


def _round_half_up(x):
    return int(np.floor(x + 0.5))


def _clamp_k(k, limit, strategy):
    if k > limit:
        warnings.warn(f"{strategy}: k={k} exceeds {limit}; clamped", RuntimeWarning,
                      stacklevel=3)
        return limit
    return k


def resample(ds, req):
    """Rebalance ``ds`` so that majority:minority matches ``req.target_ratio``.

    Oversamplers append minority rows until the minority count reaches
    ``round(n_majority / ratio)``. NearMiss keeps ``round(n_minority * ratio)``
    majority rows.
    """
    n_maj, n_min = class_counts(ds)
    P, N = ds.minority, ds.majority
    rng = as_generator(req.seed)
    if req.strategy == "nearmiss":
        n_keep = min(n_maj, _round_half_up(n_min * req.target_ratio))
        k = _clamp_k(req.k, n_min, "nearmiss")
        keep = np.sort(nearmiss(N, P, n_keep, k))
        maj_rows = np.flatnonzero(ds.labels == NEGATIVE)
        retained = np.zeros(ds.n, dtype=bool)
        retained[maj_rows[keep]] = True
        retained[ds.labels == POSITIVE] = True
        out = ds.subset(retained)
        mask = np.zeros(out.n, dtype=bool)
        mask[out.labels == NEGATIVE] = True
        return ResampleResult(out, mask, {"kept_majority_rows": maj_rows[keep]})

    n_new = max(0, _round_half_up(n_maj / req.target_ratio) - n_min)
    if n_new == 0:
        return ResampleResult(ds, np.zeros(ds.n, dtype=bool), {})
    if req.strategy == "ros":
        new, src = ros(P, n_new, rng)
        prov = {"source": src}
    elif req.strategy == "smote":
        new, prov = smote(P, n_new, _clamp_k(req.k, n_min - 1, "smote"), rng)
    elif req.strategy == "adasyn":
        new, prov = adasyn(P, N, n_new, _clamp_k(req.k, ds.n - 1, "adasyn"), rng)
    else:
        new, prov = kde_oversample(P, n_new, rng)
    # provenance indices refer to rows of ds, not of the minority submatrix
    min_rows = np.flatnonzero(ds.labels == POSITIVE)
    for key in ("source", "neighbor"):
        if key in prov:
            prov[key] = min_rows[prov[key]]
    out = ds.replace(
        features=np.vstack([ds.features, new]),
        labels=np.concatenate([ds.labels, np.full(n_new, POSITIVE)]),
    )
    mask = np.zeros(out.n, dtype=bool)
    mask[ds.n:] = True
    return ResampleResult(out, mask, prov)


class _BaseSampler(BaseEstimator):
    """``fit_resample(X, y)`` over arrays with ``y`` in {0, 1}, 1 = minority."""

    _strategy = None

    def fit_resample(self, X, y):
        X, y = check_X_y(X, y)
        y = np.asarray(y)
        if set(np.unique(y)) != {0, 1}:
            raise DataError("fit_resample expects binary labels in {0, 1}")
        ds = Dataset(X, y)
        req = ResampleRequest(
            strategy=self._strategy,
            target_ratio=self.target_ratio,
            k_neighbors=getattr(self, "k_neighbors", None),
            seed=self.random_state,
        )
        result = resample(ds, req)
        self.synthetic_mask_ = result.synthetic_mask
        self.provenance_ = result.provenance
        return np.array(result.dataset.features), np.array(result.dataset.labels)


class RandomOverSampler(_BaseSampler):
    _strategy = "ros"

    def __init__(self, target_ratio=1.0, random_state=None):
        self.target_ratio = target_ratio
        self.random_state = random_state


class SMOTE(_BaseSampler):
    _strategy = "smote"

    def __init__(self, target_ratio=1.0, k_neighbors=5, random_state=None):
        self.target_ratio = target_ratio
        self.k_neighbors = k_neighbors
        self.random_state = random_state


class ADASYN(_BaseSampler):
    _strategy = "adasyn"

    def __init__(self, target_ratio=1.0, k_neighbors=5, random_state=None):
        self.target_ratio = target_ratio
        self.k_neighbors = k_neighbors
        self.random_state = random_state


class NearMiss(_BaseSampler):
    """Deterministic; ``random_state`` is accepted for interface symmetry only."""

    _strategy = "nearmiss"

    def __init__(self, target_ratio=1.0, k_neighbors=3, random_state=None):
        self.target_ratio = target_ratio
        self.k_neighbors = k_neighbors
        self.random_state = random_state


class KDEOverSampler(_BaseSampler):
    _strategy = "kde"

    def __init__(self, target_ratio=1.0, random_state=None):
        self.target_ratio = target_ratio
        self.random_state = random_state


_ESTIMATORS = {
    "ros": RandomOverSampler,
    "smote": SMOTE,
    "adasyn": ADASYN,
    "nearmiss": NearMiss,
    "kde": KDEOverSampler,
}


def make_sampler(name, **params):
    try:
        cls = _ESTIMATORS[name]
    except KeyError:
        raise ArgumentError(f"unknown sampler {name!r}; choose from {STRATEGIES}") from None
    return cls(**params)
