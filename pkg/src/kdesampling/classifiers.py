"""Base classifiers: brute-force kNN vote and a one-hidden-layer MLP.

Both expose a score in [0, 1] for the positive (minority) class so AUC can
be computed. A score of exactly 0.5 is predicted positive.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._rng import as_generator
from .exceptions import ArgumentError, DataError, ShapeError, TrainingError
from .neighbors import NeighborIndex, knn_batch

__all__ = [
    "KnnModel",
    "knn_fit",
    "knn_predict_score",
    "MlpConfig",
    "MlpModel",
    "mlp_init",
    "mlp_loss_and_grad",
    "mlp_train",
    "mlp_predict_score",
    "KNNClassifier",
    "MLPClassifier",
    "make_classifier",
]


# -- k nearest neighbors ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KnnModel:
    index: NeighborIndex
    labels: np.ndarray
    k: int = 5


def knn_fit(X, y, k=5):
    index = NeighborIndex(X)
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (index.n,):
        raise ShapeError(f"labels must have length {index.n}")
    if not 1 <= k <= index.n:
        raise ArgumentError(f"k={k} must lie in [1, {index.n}]")
    return KnnModel(index, y, k)


def knn_predict_score(model, x):
    """Fraction of positive labels among the k nearest training rows.

    ``x`` may be one d-vector (returns a float) or an m x d matrix.
    """
    Q = np.asarray(x, dtype=float)
    single = Q.ndim == 1
    Q = np.atleast_2d(Q)
    if Q.shape[1] != model.index.data.shape[1]:
        raise ShapeError(
            f"query dimension {Q.shape[1]} != training dimension {model.index.data.shape[1]}")
    rows, _ = knn_batch(model.index, Q, model.k)
    scores = model.labels[rows].sum(axis=1) / model.k
    return float(scores[0]) if single else scores


# -- multilayer perceptron ----------------------------------------------------

@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int = 32
    epochs: int = 200
    learning_rate: float = 0.01
    batch_size: int = 32
    seed: object = None

    def __post_init__(self):
        if self.hidden_units < 1:
            raise ArgumentError("hidden_units must be >= 1")
        if self.epochs < 1:
            raise ArgumentError("epochs must be >= 1")
        if not self.learning_rate > 0:
            raise ArgumentError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ArgumentError("batch_size must be >= 1")


@dataclass(eq=False)
class MlpModel:
    """ReLU hidden layer, single logistic output unit."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: float
    loss_history: list = field(default_factory=list)

    @property
    def n_features(self):
        return self.W1.shape[0]

    def params(self):
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": np.atleast_1d(self.b2)}


def mlp_init(n_features, hidden_units, rng):
    """Glorot-uniform weights, zero biases."""
    lim1 = math.sqrt(6.0 / (n_features + hidden_units))
    lim2 = math.sqrt(6.0 / (hidden_units + 1))
    return MlpModel(
        W1=rng.uniform(-lim1, lim1, size=(n_features, hidden_units)),
        b1=np.zeros(hidden_units),
        W2=rng.uniform(-lim2, lim2, size=hidden_units),
        b2=0.0,
    )


def _forward(model, X):
    a = X @ model.W1 + model.b1
    h = np.maximum(a, 0.0)
    z = h @ model.W2 + model.b2
    return a, h, z


def _bce_from_logits(z, y):
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def mlp_loss_and_grad(model, X, y):
    """Mean binary cross-entropy and its gradient w.r.t. every parameter."""
    a, h, z = _forward(model, X)
    loss = _bce_from_logits(z, y)
    dz = (expit(z) - y) / X.shape[0]
    dW2 = h.T @ dz
    db2 = dz.sum()
    da = np.outer(dz, model.W2) * (a > 0)
    dW1 = X.T @ da
    db1 = da.sum(axis=0)
    return loss, {"W1": dW1, "b1": db1, "W2": dW2, "b2": np.atleast_1d(db2)}


def mlp_train(X, y, config=None):
    """Mini-batch SGD on binary cross-entropy.

    ``loss_history`` on the returned model holds the full-training-set loss
    after each epoch.
    """
    config = config or MlpConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError(f"bad training shapes X{X.shape}, y{y.shape}")
    if np.unique(y).size < 2:
        raise DataError("MLP training needs both classes present")
    rng = as_generator(config.seed)
    model = mlp_init(X.shape[1], config.hidden_units, rng)
    n, lr, bs = X.shape[0], config.learning_rate, config.batch_size
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        # overflow shows up as a non-finite loss, checked below
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(0, n, bs):
                idx = order[s:s + bs]
                _, g = mlp_loss_and_grad(model, X[idx], y[idx])
                model.W1 -= lr * g["W1"]
                model.b1 -= lr * g["b1"]
                model.W2 -= lr * g["W2"]
                model.b2 -= lr * float(g["b2"][0])
            loss = _bce_from_logits(_forward(model, X)[2], y)
        if not math.isfinite(loss):
            raise TrainingError(f"training diverged at epoch {epoch} (loss={loss})")
        model.loss_history.append(loss)
    return model


def mlp_predict_score(model, x):
    """Logistic output for ``x`` (one d-vector or an m x d matrix)."""
    Q = np.asarray(x, dtype=float)
    single = Q.ndim == 1
    Q = np.atleast_2d(Q)
    if Q.shape[1] != model.n_features:
        raise ShapeError(f"query dimension {Q.shape[1]} != model dimension {model.n_features}")
    p = expit(_forward(model, Q)[2])
    return float(p[0]) if single else p


# -- estimator wrappers -------------------------------------------------------

class _ScoreClassifier(ClassifierMixin, BaseEstimator):
    classes_ = np.array([0, 1])

    def _score(self, X):
        raise NotImplementedError

    def predict_proba(self, X):
        s = self._score(X)
        return np.column_stack([1.0 - s, s])

    def decision_function(self, X):
        return self._score(X)

    def predict(self, X):
        return (self._score(X) >= 0.5).astype(np.int64)

    def _check_fit_input(self, X, y):
        X, y = check_X_y(X, y)
        if not set(np.unique(y)) <= {0, 1}:
            raise DataError("labels must be 0/1 with 1 = minority")
        self.n_features_in_ = X.shape[1]
        return X, y


class KNNClassifier(_ScoreClassifier):
    """k-nearest-neighbor vote; ``predict_proba`` is the positive vote share."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = self._check_fit_input(X, y)
        self.model_ = knn_fit(X, y, min(self.n_neighbors, X.shape[0]))
        return self

    def _score(self, X):
        check_is_fitted(self, "model_")
        return knn_predict_score(self.model_, check_array(X))


class MLPClassifier(_ScoreClassifier):
    """One hidden ReLU layer, logistic output, plain mini-batch SGD."""

    def __init__(self, hidden_units=32, epochs=200, learning_rate=0.01, batch_size=32,
                 random_state=None):
        self.hidden_units = hidden_units
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.random_state = random_state

    def fit(self, X, y):
        X, y = self._check_fit_input(X, y)
        cfg = MlpConfig(self.hidden_units, self.epochs, self.learning_rate, self.batch_size,
                        self.random_state)
        self.model_ = mlp_train(X, y, cfg)
        self.loss_curve_ = list(self.model_.loss_history)
        return self

    def _score(self, X):
        check_is_fitted(self, "model_")
        return mlp_predict_score(self.model_, check_array(X))


def make_classifier(name, **params):
    if name == "knn":
        return KNNClassifier(**params)
    if name == "mlp":
        return MLPClassifier(**params)
    raise ArgumentError(f"unknown classifier {name!r}; choose from ('knn', 'mlp')")
