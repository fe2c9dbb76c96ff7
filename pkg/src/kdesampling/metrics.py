"""Imbalance-aware metrics with the minority class as positive (label 1)."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import MetricError, ShapeError

__all__ = [
    "ConfusionMatrix",
    "confusion",
    "g_mean",
    "f1",
    "auc",
    "auc_trapezoid",
    "roc_curve",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def specificity(self):
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else 0.0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0


def _binary(v, name):
    a = np.asarray(v).ravel()
    if not np.all(np.isin(a, (0, 1))):
        raise ValueError(f"{name} must contain only 0/1 labels")
    return a.astype(bool)


def confusion(y_true, y_pred):
    t, p = _binary(y_true, "y_true"), _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ShapeError(f"length mismatch: {t.size} labels vs {p.size} predictions")
    if t.size == 0:
        raise ShapeError("need at least one instance")
    return ConfusionMatrix(
        tp=int(np.count_nonzero(t & p)),
        fp=int(np.count_nonzero(~t & p)),
        tn=int(np.count_nonzero(~t & ~p)),
        fn=int(np.count_nonzero(t & ~p)),
    )


def g_mean(cm):
    """Geometric mean of the true-positive and true-negative rates."""
    if cm.tp + cm.fn < 1 or cm.tn + cm.fp < 1:
        raise MetricError("G-mean needs at least one positive and one negative instance")
    return float(np.sqrt(cm.tp / (cm.tp + cm.fn) * (cm.tn / (cm.tn + cm.fp))))


def f1(cm, return_flag=False):
    """Harmonic mean of precision and recall.

    Returns 0.0 when ``tp == 0``. With ``return_flag=True`` the result is
    ``(value, degenerate)``, ``degenerate`` being True in that case.
    """
    degenerate = cm.tp == 0
    if degenerate:
        value = 0.0
    else:
        # 2PR/(P+R) simplified to counts; exact for P == R
        value = 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)
    return (value, degenerate) if return_flag else value


def _check_scores(y_true, scores):
    t = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=float).ravel()
    if t.shape != s.shape:
        raise ShapeError(f"length mismatch: {t.size} labels vs {s.size} scores")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    n_pos = int(t.sum())
    if n_pos == 0 or n_pos == t.size:
        raise MetricError("AUC needs both classes in y_true")
    return t, s, n_pos, t.size - n_pos


def auc(y_true, scores):
    """ROC AUC as the Mann-Whitney statistic with midranks for ties."""
    t, s, n_pos, n_neg = _check_scores(y_true, scores)
    ranks = rankdata(s, method="average")
    u = ranks[t].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def roc_curve(y_true, scores):
    """Empirical ROC vertices ``(fpr, tpr)``, one per distinct threshold."""
    t, s, n_pos, n_neg = _check_scores(y_true, scores)
    order = np.argsort(-s, kind="mergesort")
    s_sorted, t_sorted = s[order], t[order]
    last_of_group = np.r_[np.flatnonzero(np.diff(s_sorted)), s.size - 1]
    tps = np.cumsum(t_sorted)[last_of_group]
    fps = (last_of_group + 1) - tps
    return np.r_[0.0, fps / n_neg], np.r_[0.0, tps / n_pos]


def auc_trapezoid(y_true, scores):
    """ROC AUC by trapezoidal integration of :func:`roc_curve`."""
    fpr, tpr = roc_curve(y_true, scores)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
