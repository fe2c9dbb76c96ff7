"""Run (dataset x sampler x classifier x replication) cells and collect metrics.

Per replication a dataset is split once (stratified, seeded by dataset name
and replication index), so every sampler/classifier pair is compared on the
same train/test partition. Within a cell:

1. standardize with train statistics (optional)
2. resample the train part only
3. fit the classifier, score the untouched test part

A SHA-256 of the test partition taken before resampling is re-checked before
scoring.
"""

import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .._rng import derive_rng
from ..classifiers import make_classifier
from ..dataset import FIXTURES, LabelSpec, fixture_path, load_csv, stratified_split
from ..exceptions import KdeSamplingError, LeakageError
from ..metrics import auc, confusion, f1, g_mean
from ..samplers import ResampleRequest, resample
from ..synthgen import generate
from .config import RAW

__all__ = [
    "CellResult",
    "Report",
    "load_source",
    "resolved_generator_seed",
    "standardize",
    "run_cell",
    "classifier_params",
    "compute_metric",
    "run_experiment",
]

logger = logging.getLogger(__name__)


@dataclass
class CellResult:
    """One (dataset, sampler, classifier) combination across replications.

    ``values[metric][rep]`` is ``None`` for a failed replication; ``means``
    is ``None`` for a metric with any failed replication.
    """

    dataset: str
    sampler: str
    classifier: str
    values: dict
    means: dict
    errors: list = field(default_factory=list)

    @property
    def failed(self):
        return bool(self.errors)

    @property
    def key(self):
        return (self.dataset, self.sampler, self.classifier)


@dataclass
class Report:
    config: dict
    cells: list
    best: dict

    @property
    def n_cells(self):
        """Number of executed (dataset, sampler, classifier, replication) cells."""
        return len(self.cells) * self.config["replications"]

    def cell(self, dataset, sampler, classifier):
        for c in self.cells:
            if c.key == (dataset, sampler, classifier):
                return c
        raise KeyError((dataset, sampler, classifier))

    def mean(self, dataset, sampler, classifier, metric):
        return self.cell(dataset, sampler, classifier).means[metric]


def resolved_generator_seed(source, master):
    """Explicit ``seed`` parameter, else one derived from the master seed and name."""
    params = dict(source.params)
    if "seed" in params:
        return int(params["seed"])
    return int(derive_rng(master, "dataset", source.name).integers(0, 2 ** 63))


def load_source(source, master):
    if source.csv is not None:
        if source.csv.startswith("fixture:"):
            name = source.csv.split(":", 1)[1]
            return load_csv(fixture_path(name), FIXTURES[name][1])
        return load_csv(source.csv, LabelSpec(source.label, source.positive))
    params = dict(source.params)
    params["seed"] = resolved_generator_seed(source, master)
    return generate(source.generator, **params)


def standardize(train, test):
    """Z-score both parts with the train mean and (population) std."""
    mu = train.features.mean(axis=0)
    sd = train.features.std(axis=0)
    sd[sd == 0] = 1.0
    return (train.replace(features=(train.features - mu) / sd),
            test.replace(features=(test.features - mu) / sd))


def _digest(ds):
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.features).tobytes())
    h.update(np.ascontiguousarray(ds.labels).tobytes())
    return h.hexdigest()


def classifier_params(name, params, rng):
    if name == "knn":
        return {"n_neighbors": params.get("knn.k", 5)}
    return {
        "hidden_units": params.get("mlp.hidden_units", 32),
        "epochs": params.get("mlp.epochs", 200),
        "learning_rate": params.get("mlp.learning_rate", 0.01),
        "batch_size": params.get("mlp.batch_size", 32),
        "random_state": rng,
    }


def compute_metric(name, y_true, y_pred, scores):
    if name == "auc":
        return auc(y_true, scores)
    cm = confusion(y_true, y_pred)
    return g_mean(cm) if name == "gmean" else f1(cm)


def run_cell(ds, dataset_name, sampler, classifier, rep, cfg):
    """Evaluate one cell; returns ``{metric: value}``. Raises on failure."""
    master = cfg.seed
    params = dict(cfg.params)
    train, test = stratified_split(
        ds, cfg.test_fraction, derive_rng(master, "split", dataset_name, rep))
    if cfg.standardize:
        train, test = standardize(train, test)
    test_hash = _digest(test)

    if sampler != RAW:
        req = ResampleRequest(
            strategy=sampler,
            target_ratio=cfg.target_ratio,
            k_neighbors=params.get(f"{sampler}.k"),
            seed=derive_rng(master, "resample", dataset_name, sampler, rep),
        )
        train = resample(train, req).dataset

    clf_rng = derive_rng(master, "classifier", dataset_name, classifier, rep)
    clf = make_classifier(classifier, **classifier_params(classifier, params, clf_rng))
    clf.fit(np.array(train.features), np.array(train.labels))
    if _digest(test) != test_hash:
        raise LeakageError(f"test partition of {dataset_name!r} changed before scoring")
    scores = clf.predict_proba(test.features)[:, 1]
    y_pred = (scores >= 0.5).astype(np.int64)
    return {m: compute_metric(m, test.labels, y_pred, scores) for m in cfg.metrics}


def _run_unit(args):
    ds, dataset_name, sampler, classifier, rep, cfg = args
    try:
        return run_cell(ds, dataset_name, sampler, classifier, rep, cfg), None
    except (KdeSamplingError, np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        return None, f"rep {rep}: {type(exc).__name__}: {exc}"


def _best_markers(cells, cfg):
    best = {}
    for ds in cfg.datasets:
        for clf in cfg.classifiers:
            for m in cfg.metrics:
                vals = {c.sampler: c.means[m] for c in cells
                        if c.dataset == ds.name and c.classifier == clf
                        and c.means[m] is not None}
                if vals:
                    top = max(vals.values())
                    winners = [s for s in cfg.samplers if vals.get(s) == top]
                    best[f"{ds.name}|{clf}|{m}"] = winners
    return best


def run_experiment(cfg):
    """Run every cell of ``cfg`` and assemble a :class:`Report`.

    Failed cells are kept with their reason and ``None`` values; the run
    continues. Output order follows the config, independent of scheduling.
    """
    datasets = {}
    load_errors = {}
    for src in cfg.datasets:
        try:
            datasets[src.name] = load_source(src, cfg.seed)
        except KdeSamplingError as exc:
            load_errors[src.name] = f"{type(exc).__name__}: {exc}"

    keys = [(src.name, s, c) for src in cfg.datasets for s in cfg.samplers
            for c in cfg.classifiers]
    units = [(datasets[d], d, s, c, r, cfg) for (d, s, c) in keys if d in datasets
             for r in range(cfg.replications)]
    if cfg.workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_run_unit, units, chunksize=1))
    else:
        outcomes = [_run_unit(u) for u in units]
    by_unit = {(u[1], u[2], u[3], u[4]): o for u, o in zip(units, outcomes)}

    cells = []
    for d, s, c in keys:
        values = {m: [] for m in cfg.metrics}
        errors = []
        for r in range(cfg.replications):
            if d in load_errors:
                res, err = None, load_errors[d]
            else:
                res, err = by_unit[(d, s, c, r)]
            if err:
                errors.append(err)
                logger.warning("cell %s/%s/%s failed: %s", d, s, c, err)
            for m in cfg.metrics:
                values[m].append(None if res is None else float(res[m]))
        means = {m: (None if any(v is None for v in vals) else math.fsum(vals) / len(vals))
                 for m, vals in values.items()}
        cells.append(CellResult(d, s, c, values, means, errors))

    echo = cfg.describe()
    for entry, src in zip(echo["datasets"], cfg.datasets):
        if src.generator is not None:
            entry["resolved_seed"] = resolved_generator_seed(src, cfg.seed)
    return Report(config=echo, cells=cells, best=_best_markers(cells, cfg))
