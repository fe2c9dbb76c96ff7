"""Experiment configuration: a flat ``key = value`` text format.

Example::

    # simulated benchmarks
    datasets = cube, separable
    samplers = nearmiss, ros, smote, adasyn, kde
    classifiers = mlp
    replications = 2
    seed = 1
    standardize = false
    dataset.cube.n_minority = 100
    dataset.mine.csv = data/mine.csv
    dataset.mine.label = class
    dataset.mine.positive = yes

A dataset name with no ``dataset.<name>.*`` keys resolves to a bundled
fixture (``ecoli``) or to a generator with default parameters (``donut``,
``cube``, ``separable``). Lists are comma-separated. Later assignments
override earlier ones, so command-line ``--set`` pairs win over the file.
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..dataset import FIXTURES
from ..exceptions import ConfigError
from ..samplers import STRATEGIES
from ..synthgen import GENERATORS

__all__ = [
    "DatasetSource",
    "ExperimentConfig",
    "parse_config_text",
    "load_config",
    "config_from_pairs",
]

CLASSIFIERS = ("knn", "mlp")
METRICS = ("gmean", "f1", "auc")
RAW = "raw"

# option name -> value type
_SCALARS = {
    "replications": "int",
    "test_fraction": "float",
    "seed": "int",
    "standardize": "bool",
    "target_ratio": "float",
    "workers": "int",
}
_LISTS = ("datasets", "samplers", "classifiers", "metrics")
_PARAM_KINDS = {
    "smote.k": "int",
    "adasyn.k": "int",
    "nearmiss.k": "int",
    "knn.k": "int",
    "mlp.hidden_units": "int",
    "mlp.epochs": "int",
    "mlp.learning_rate": "float",
    "mlp.batch_size": "int",
}


def _convert(value, kind, key):
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            v = value.strip().lower()
            if v in ("1", "true", "yes", "on"):
                return True
            if v in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {kind}") from None
    return value


def _auto(value):
    """Generator parameters: int, float, tuple of floats, or string."""
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if "," in value:
        return tuple(float(v) for v in value.split(","))
    return value


@dataclass(frozen=True)
class DatasetSource:
    """Either a CSV file (``csv``, ``label``, ``positive``) or a generator."""

    name: str
    csv: str = None
    label: str = None
    positive: str = None
    generator: str = None
    params: tuple = ()

    def describe(self):
        d = {"name": self.name}
        if self.csv is not None:
            d.update(csv=self.csv, label=self.label, positive=self.positive)
        else:
            d.update(generator=self.generator, params=dict(self.params))
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple = ()
    samplers: tuple = STRATEGIES
    classifiers: tuple = ("knn",)
    replications: int = 2
    test_fraction: float = 0.3
    seed: int = 0
    metrics: tuple = METRICS
    standardize: bool = True
    target_ratio: float = 1.0
    workers: int = 1
    params: tuple = ()

    def __post_init__(self):
        if not self.datasets:
            raise ConfigError("config lists no datasets")
        if not self.classifiers:
            raise ConfigError("config lists no classifiers")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        samplers = tuple(s for s in self.samplers if s != RAW)
        for s in samplers:
            if s not in STRATEGIES:
                raise ConfigError(f"unknown sampler {s!r}; choose from {(RAW,) + STRATEGIES}")
        # the raw baseline is always present and always first
        object.__setattr__(self, "samplers", (RAW,) + samplers)
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise ConfigError(f"unknown classifier {c!r}; choose from {CLASSIFIERS}")
        if not self.metrics:
            raise ConfigError("config lists no metrics")
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}; choose from {METRICS}")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate dataset names")

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def with_seed(self, seed):
        return dataclasses.replace(self, seed=seed)

    def describe(self):
        """JSON-ready echo of the configuration."""
        return {
            "datasets": [d.describe() for d in self.datasets],
            "samplers": list(self.samplers),
            "classifiers": list(self.classifiers),
            "replications": self.replications,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "metrics": list(self.metrics),
            "standardize": self.standardize,
            "target_ratio": self.target_ratio,
            "params": dict(self.params),
        }


def _split_list(value):
    return tuple(v.strip() for v in value.split(",") if v.strip())


def parse_pairs(text, source="<config>"):
    """``key = value`` lines to an ordered list of pairs. ``#`` starts a comment."""
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        pairs.append((key, value))
    return pairs


def _resolve_dataset(name, keys):
    if "csv" in keys:
        unknown = set(keys) - {"csv", "label", "positive"}
        if unknown:
            raise ConfigError(f"dataset {name!r}: unknown keys {sorted(unknown)} for a CSV source")
        return DatasetSource(name, csv=keys["csv"], label=keys.get("label", "-1"),
                             positive=keys.get("positive"))
    generator = keys.get("generator")
    if generator is None:
        if not keys and name in FIXTURES:
            return DatasetSource(name, csv=f"fixture:{name}")
        if name in GENERATORS:
            generator = name
        else:
            raise ConfigError(
                f"dataset {name!r} has no source: set dataset.{name}.csv or "
                f"dataset.{name}.generator (one of {sorted(GENERATORS)})")
    if generator not in GENERATORS:
        raise ConfigError(f"dataset {name!r}: unknown generator {generator!r}")
    spec_cls = GENERATORS[generator][0]
    fields = {f.name for f in dataclasses.fields(spec_cls)}
    params = {}
    for k, v in keys.items():
        if k == "generator":
            continue
        if k not in fields:
            raise ConfigError(f"dataset {name!r}: generator {generator!r} has no parameter {k!r}")
        params[k] = _auto(v)
    return DatasetSource(name, generator=generator, params=tuple(sorted(params.items())))


def config_from_pairs(pairs):
    """Build an :class:`ExperimentConfig` from ``(key, value)`` pairs (last wins)."""
    values, params, ds_keys = {}, {}, {}
    for key, value in pairs:
        if key in _LISTS:
            values[key] = _split_list(value)
        elif key in _SCALARS:
            values[key] = _convert(value, _SCALARS[key], key)
        elif key in _PARAM_KINDS:
            params[key] = _convert(value, _PARAM_KINDS[key], key)
        elif key.startswith("dataset."):
            parts = key.split(".", 2)
            if len(parts) != 3:
                raise ConfigError(f"{key}: expected dataset.<name>.<field>")
            ds_keys.setdefault(parts[1], {})[parts[2]] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    names = values.pop("datasets", ())
    stray = set(ds_keys) - set(names)
    if stray:
        raise ConfigError(f"dataset settings for unlisted datasets: {sorted(stray)}")
    values["datasets"] = tuple(_resolve_dataset(n, ds_keys.get(n, {})) for n in names)
    values["params"] = tuple(sorted(params.items()))
    return ExperimentConfig(**values)


def parse_config_text(text, overrides=(), source="<config>"):
    return config_from_pairs(parse_pairs(text, source) + list(overrides))


def load_config(path, overrides=()):
    """Read a config file. Relative CSV paths resolve against the file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    cfg = parse_config_text(text, overrides, source=str(path))
    base = path.parent
    datasets = tuple(
        dataclasses.replace(d, csv=str(base / d.csv))
        if d.csv and not d.csv.startswith("fixture:") and not Path(d.csv).is_absolute()
        else d
        for d in cfg.datasets
    )
    return dataclasses.replace(cfg, datasets=datasets)
