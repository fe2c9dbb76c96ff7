"""Multivariate Gaussian kernel density estimation and sampling.

The bandwidth matrix ``H`` is a covariance: each kernel is a normal density
``N(x_i, H)``. Under Scott's rule ``H = n**(-2/(d+4)) * S`` with ``S`` the
unbiased sample covariance. The factor is squared because ``H`` is a
covariance, not a scale; this matches ``scipy.stats.gaussian_kde``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._rng import as_generator
from .exceptions import DataError, FitError, SearchError, ShapeError

__all__ = [
    "scott_factor",
    "BandwidthRule",
    "KdeModel",
    "fit",
    "from_bandwidth",
    "density",
    "log_density",
    "sample",
    "loo_loglik_bandwidth_search",
    "GaussianKDE",
]

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)
# relative eigenvalue floor below which a covariance counts as singular
_SINGULAR_RTOL = 1e-12


def scott_factor(n, d):
    """Scott's rule scale factor ``n ** (-1 / (d + 4))``."""
    if n < 1 or d < 1:
        raise ValueError(f"scott_factor needs n >= 1 and d >= 1, got n={n}, d={d}")
    return float(n) ** (-1.0 / (d + 4))


@dataclass(frozen=True)
class BandwidthRule:
    """``BandwidthRule.scott()`` or ``BandwidthRule.fixed(H)``."""

    variant: str = "scott"
    matrix: np.ndarray = None

    @classmethod
    def scott(cls):
        return cls("scott")

    @classmethod
    def fixed(cls, matrix):
        H = np.atleast_2d(np.asarray(matrix, dtype=float))
        _check_spd(H, what="fixed bandwidth matrix")
        return cls("fixed", H)


@dataclass(frozen=True, eq=False)
class KdeModel:
    """A fitted KDE. Construct via :func:`fit` or :func:`from_bandwidth`."""

    points: np.ndarray
    bandwidth_cov: np.ndarray
    chol_factor: np.ndarray
    log_norm_const: float

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


def _check_spd(H, what):
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError(f"{what} must be square, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise FitError(f"{what} has non-finite entries")
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(H).max())):
        raise FitError(f"{what} is not symmetric")
    _degenerate_direction(H, what)


def _degenerate_direction(S, what, feature_names=None):
    """Raise FitError if ``S`` is (numerically) singular, naming the direction."""
    evals, evecs = np.linalg.eigh(S)
    top = evals[-1]
    if top > 0 and evals[0] > _SINGULAR_RTOL * top:
        return
    v = evecs[:, 0]
    j = int(np.argmax(np.abs(v)))
    name = feature_names[j] if feature_names else f"feature {j}"
    direction = np.array2string(v, precision=3, suppress_small=True)
    raise FitError(
        f"{what} is singular: eigenvalue {evals[0]:.3g} (largest {top:.3g}) along "
        f"direction {direction}, dominated by {name}")


def _cholesky(H):
    try:
        return np.linalg.cholesky(H)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"Cholesky factorization failed: {exc}") from None


def from_bandwidth(points, bandwidth_cov):
    """Build a model from points and an explicit bandwidth covariance.

    Unlike :func:`fit` this accepts a single point; it is the constructor the
    fixed-bandwidth path uses.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    H = np.atleast_2d(np.asarray(bandwidth_cov, dtype=float))
    if H.shape != (X.shape[1], X.shape[1]):
        raise ShapeError(f"bandwidth must be {X.shape[1]}x{X.shape[1]}, got {H.shape}")
    _check_spd(H, what="bandwidth matrix")
    H = 0.5 * (H + H.T)
    L = _cholesky(H)
    log_norm = -0.5 * X.shape[1] * _LOG_2PI - float(np.sum(np.log(np.diag(L))))
    X.setflags(write=False)
    H.setflags(write=False)
    L.setflags(write=False)
    return KdeModel(points=X, bandwidth_cov=H, chol_factor=L, log_norm_const=log_norm)


def _validate_points(points):
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"points must be an n x d matrix, got shape {X.shape}")
    if X.shape[0] < 2:
        raise DataError(f"KDE fit needs at least 2 points, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise DataError("points contain non-finite values")
    return X


def scott_bandwidth(points, feature_names=None):
    """Scott bandwidth covariance ``factor**2 * S`` for ``points``."""
    X = _validate_points(points)
    n, d = X.shape
    S = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    _degenerate_direction(S, "sample covariance", feature_names)
    return scott_factor(n, d) ** 2 * S


def fit(points, rule=None, feature_names=None):
    """Fit a Gaussian KDE to ``points`` (n x d, n >= 2)."""
    rule = rule or BandwidthRule.scott()
    X = _validate_points(points)
    if rule.variant == "scott":
        H = scott_bandwidth(X, feature_names)
    elif rule.variant == "fixed":
        H = rule.matrix
    else:
        raise ValueError(f"unknown bandwidth rule {rule.variant!r}")
    return from_bandwidth(X, H)


def _as_queries(model, x):
    Q = np.asarray(x, dtype=float)
    single = Q.ndim <= 1
    if Q.ndim == 0:
        Q = Q.reshape(1, 1)
    elif Q.ndim == 1:
        Q = Q.reshape(1, -1) if Q.shape[0] == model.d else None
    if Q is None or Q.ndim != 2 or Q.shape[1] != model.d:
        raise ShapeError(f"query must have dimension {model.d}, got shape {np.shape(x)}")
    if not np.all(np.isfinite(Q)):
        raise ValueError("query contains non-finite values")
    return Q, single


def _log_kernel_matrix(model, Q):
    """``log K_H(q - x_i)`` for every query row and fitted point, (m, n)."""
    L = model.chol_factor
    out = np.empty((Q.shape[0], model.n))
    for r, q in enumerate(Q):
        diff = q - model.points
        z = solve_triangular(L, diff.T, lower=True, check_finite=False)
        out[r] = model.log_norm_const - 0.5 * np.einsum("ij,ij->j", z, z)
    return out


def log_density(model, x):
    """Log of the KDE at ``x`` (a d-vector or an m x d matrix)."""
    Q, single = _as_queries(model, x)
    vals = logsumexp(_log_kernel_matrix(model, Q), axis=1) - math.log(model.n)
    return float(vals[0]) if single else vals


def density(model, x):
    """KDE value ``(1/n) sum_i N(x; x_i, H)`` at ``x``; may underflow to 0."""
    ld = log_density(model, x)
    return float(np.exp(ld)) if np.ndim(ld) == 0 else np.exp(ld)


def sample(model, m, rng=None):
    """Draw ``m`` points: a uniformly chosen fitted point plus ``N(0, H)`` noise.

    Returns ``(samples, centers)``. Centers are drawn before the noise from
    the same stream.
    """
    if m < 1:
        raise ValueError(f"sample count must be >= 1, got {m}")
    rng = as_generator(rng)
    centers = rng.integers(0, model.n, size=m)
    z = rng.standard_normal((m, model.d))
    return model.points[centers] + z @ model.chol_factor.T, centers


def _loo_scores(points, grid):
    X = _validate_points(points)
    n, d = X.shape
    if n < 3:
        raise DataError(f"leave-one-out search needs at least 3 points, got {n}")
    H0 = scott_bandwidth(X)
    L0 = _cholesky(H0)
    # squared Mahalanobis distances under the base Scott bandwidth
    Z = solve_triangular(L0, X.T, lower=True)
    sq = np.sum(Z * Z, axis=0)
    maha = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Z.T @ Z), 0.0)
    np.fill_diagonal(maha, np.inf)
    base_log_norm = -0.5 * d * _LOG_2PI - float(np.sum(np.log(np.diag(L0))))
    scores = []
    for c in grid:
        with np.errstate(divide="ignore", over="ignore"):
            logk = base_log_norm - d * math.log(c) - 0.5 * maha / (c * c)
            loo = logsumexp(logk, axis=1) - math.log(n - 1)
        scores.append(float(np.sum(loo)))
    return H0, scores


def _select_multiplier(grid, scores):
    """Best-scoring multiplier; ties go to the smallest multiplier."""
    best = None
    for c, s in sorted(zip(grid, scores), key=lambda cs: cs[0]):
        if not np.isfinite(s):
            continue
        if best is None or s > best[1]:
            best = (c, s)
    if best is None:
        raise SearchError("every bandwidth multiplier gave a -inf leave-one-out log-likelihood")
    return best[0]


def loo_loglik_bandwidth_search(points, grid):
    """Pick ``c`` in ``grid`` maximizing the leave-one-out log-likelihood.

    Candidate bandwidths are ``c**2`` times the Scott bandwidth. Returns a
    fixed :class:`BandwidthRule`.
    """
    grid = [float(c) for c in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(c <= 0 or not math.isfinite(c) for c in grid):
        raise ValueError("grid multipliers must be finite and > 0")
    H0, scores = _loo_scores(points, grid)
    c = _select_multiplier(grid, scores)
    logger.debug("LOO bandwidth search: scores=%s, chose %s", scores, c)
    return BandwidthRule.fixed(c * c * H0)


class GaussianKDE(BaseEstimator):
    """Estimator wrapper around :func:`fit` / :func:`log_density` / :func:`sample`.

    Parameters
    ----------
    bandwidth : "scott", "loo" or array-like
        Scott's rule, a leave-one-out likelihood grid search over
        ``loo_grid``, or an explicit d x d bandwidth covariance.
    loo_grid : sequence of float
        Multipliers of the Scott bandwidth tried when ``bandwidth="loo"``.
    random_state : int, Generator or None
    """

    def __init__(self, bandwidth="scott", loo_grid=(0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0),
                 random_state=None):
        self.bandwidth = bandwidth
        self.loo_grid = loo_grid
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        if isinstance(self.bandwidth, str):
            if self.bandwidth == "scott":
                rule = BandwidthRule.scott()
            elif self.bandwidth == "loo":
                rule = loo_loglik_bandwidth_search(X, self.loo_grid)
            else:
                raise ValueError(f"unknown bandwidth {self.bandwidth!r}")
        else:
            rule = BandwidthRule.fixed(self.bandwidth)
        self.model_ = fit(X, rule)
        self.n_features_in_ = X.shape[1]
        return self

    @property
    def covariance_(self):
        check_is_fitted(self, "model_")
        return self.model_.bandwidth_cov

    def score_samples(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        return np.atleast_1d(log_density(self.model_, X))

    def score(self, X, y=None):
        return float(np.sum(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "model_")
        rs = self.random_state if random_state is None else random_state
        return sample(self.model_, n_samples, as_generator(rs))[0]
