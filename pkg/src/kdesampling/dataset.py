"""Binary-label datasets: CSV ingestion, stratified splitting, class counts.

Labels are stored as ``0`` (negative, majority) and ``1`` (positive,
minority). Whatever the raw encoding, the rarer class always ends up as
``1``.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import as_generator, derive_rng
from .exceptions import ConfigError, DataError, ParseError

__all__ = [
    "Dataset",
    "LabelSpec",
    "load_csv",
    "read_csv_text",
    "write_csv",
    "to_csv_text",
    "stratified_split",
    "class_counts",
    "split_counts",
    "fixture_path",
    "load_fixture",
]

POSITIVE = 1
NEGATIVE = 0


@dataclass(frozen=True)
class LabelSpec:
    """Which column holds the label and which raw value is the minority.

    ``column`` is a header name or a zero-based index (negative indices count
    from the end). When ``positive_value`` is ``None`` the column must hold
    exactly two distinct values and the rarer one becomes positive.
    """

    column: object = -1
    positive_value: object = None


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple = ()
    label_name: str = "label"
    positive_label: str = "1"
    negative_label: str = "0"

    def __post_init__(self):
        X = np.array(self.features, dtype=float, copy=True)
        y = np.array(self.labels, copy=True)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset needs n >= 1 and d >= 1, got {n}x{d}")
        if y.shape != (n,):
            raise DataError(f"labels must have length {n}, got shape {y.shape}")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite feature value at row {r}, column {c}")
        if not np.all(np.isin(y, (NEGATIVE, POSITIVE))):
            raise DataError("labels must be 0 (negative) or 1 (positive)")
        y = y.astype(np.int64)
        names = tuple(self.feature_names) if self.feature_names else tuple(
            f"x{j}" for j in range(d))
        if len(names) != d:
            raise DataError(f"expected {d} feature names, got {len(names)}")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    @property
    def minority(self):
        return self.features[self.labels == POSITIVE]

    @property
    def majority(self):
        return self.features[self.labels == NEGATIVE]

    def subset(self, rows):
        """Rows ``rows`` (index array or mask) as a new Dataset."""
        return self.replace(features=self.features[rows], labels=self.labels[rows])

    def replace(self, **changes):
        kwargs = dict(
            features=self.features,
            labels=self.labels,
            feature_names=self.feature_names,
            label_name=self.label_name,
            positive_label=self.positive_label,
            negative_label=self.negative_label,
        )
        kwargs.update(changes)
        return Dataset(**kwargs)

    def equals(self, other):
        return (
            isinstance(other, Dataset)
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and self.feature_names == other.feature_names
        )

    def __eq__(self, other):
        return self.equals(other)

    __hash__ = None


def class_counts(ds):
    """``(n_majority, n_minority)`` for a dataset."""
    n_pos = int(np.count_nonzero(ds.labels == POSITIVE))
    return ds.n - n_pos, n_pos


def _resolve_column(header, column):
    if isinstance(column, str):
        if column in header:
            return header.index(column)
        try:
            column = int(column)
        except ValueError:
            raise ConfigError(
                f"label column {column!r} not found; available: {', '.join(header)}"
            ) from None
    idx = int(column)
    if not -len(header) <= idx < len(header):
        raise ConfigError(f"label column index {idx} out of range for {len(header)} columns")
    return idx % len(header)


def read_csv_text(text, spec=None, source="<string>"):
    """Parse CSV ``text`` into a Dataset according to ``spec``."""
    spec = spec or LabelSpec()
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError(f"{source}: empty file") from None
    if len(header) < 2:
        raise ParseError(f"{source}: need at least one feature column and a label column")
    label_idx = _resolve_column(header, spec.column)
    feat_idx = [j for j in range(len(header)) if j != label_idx]

    rows, raw_labels = [], []
    for lineno, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(header):
            raise ParseError(
                f"{source}: expected {len(header)} fields, got {len(record)}", row=lineno)
        values = []
        for j in feat_idx:
            cell = record[j].strip()
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(
                    f"{source}: non-numeric feature value {cell!r}",
                    row=lineno, column=header[j]) from None
            if not math.isfinite(v):
                raise ParseError(
                    f"{source}: missing or non-finite value {cell!r}",
                    row=lineno, column=header[j])
            values.append(v)
        rows.append(values)
        raw_labels.append(record[label_idx].strip())
    if not rows:
        raise DataError(f"{source}: no data rows")

    raw = np.array(raw_labels, dtype=object)
    distinct = sorted(set(raw_labels))
    if spec.positive_value is None:
        if len(distinct) != 2:
            raise DataError(
                f"{source}: label column {header[label_idx]!r} has {len(distinct)} distinct "
                f"values {distinct[:5]}; binary labels required (or give a positive value)")
        lo, hi = distinct
        # rarer value is positive; on a tie the lexicographically larger one
        if np.count_nonzero(raw == lo) < np.count_nonzero(raw == hi):
            pos_value, neg_value = lo, hi
        else:
            pos_value, neg_value = hi, lo
    else:
        pos_value = str(spec.positive_value).strip()
        if pos_value not in distinct:
            raise DataError(
                f"{source}: positive value {pos_value!r} does not occur in column "
                f"{header[label_idx]!r}")
        others = [v for v in distinct if v != pos_value]
        if not others:
            raise DataError(f"{source}: only one class present ({pos_value!r})")
        neg_value = others[0] if len(others) == 1 else "rest"

    y = (raw == pos_value).astype(np.int64)
    n_pos = int(y.sum())
    if n_pos > len(y) - n_pos:
        warnings.warn(
            f"{source}: positive value {pos_value!r} is the majority class; "
            "swapping polarity so the minority class is positive",
            stacklevel=2,
        )
        y = 1 - y
        pos_value, neg_value = neg_value, pos_value

    return Dataset(
        features=np.array(rows, dtype=float),
        labels=y,
        feature_names=tuple(header[j] for j in feat_idx),
        label_name=header[label_idx],
        positive_label=pos_value,
        negative_label=neg_value,
    )


def load_csv(path, spec=None):
    """Load a comma-delimited file with a header row."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return read_csv_text(text, spec, source=str(path))


def to_csv_text(ds, extra_columns=None):
    """Serialize ``ds``; the label column goes last. Floats use ``repr``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    extra_columns = extra_columns or {}
    writer.writerow(list(ds.feature_names) + [ds.label_name] + list(extra_columns))
    extras = [np.asarray(v) for v in extra_columns.values()]
    for i in range(ds.n):
        label = ds.positive_label if ds.labels[i] == POSITIVE else ds.negative_label
        row = [repr(float(v)) for v in ds.features[i]] + [label]
        row += [str(e[i]) for e in extras]
        writer.writerow(row)
    return buf.getvalue()


def write_csv(ds, path, extra_columns=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv_text(ds, extra_columns))


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_counts(n_class, test_fraction):
    """Test-set size for one class: round-half-up, kept within [1, n-1]."""
    k = _round_half_up(n_class * test_fraction)
    return min(max(k, 1), n_class - 1)


def stratified_split(ds, test_fraction=0.3, seed=0):
    """Split ``ds`` into ``(train, test)`` preserving class proportions.

    Each class contributes ``round_half_up(count * test_fraction)`` rows to
    the test part. Rows keep their original relative order in both parts.
    ``seed`` is an int master seed or a ``numpy.random.Generator``.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = derive_rng(seed, "stratified_split") if isinstance(seed, (int, np.integer)) \
        else as_generator(seed)
    test_mask = np.zeros(ds.n, dtype=bool)
    for cls in (NEGATIVE, POSITIVE):
        idx = np.flatnonzero(ds.labels == cls)
        if idx.size < 2:
            raise DataError(
                f"class {cls} has {idx.size} member(s); stratified split needs at least 2")
        k = split_counts(idx.size, test_fraction)
        test_mask[rng.permutation(idx)[:k]] = True
    return ds.subset(~test_mask), ds.subset(test_mask)


FIXTURES = {"ecoli": ("ecoli.csv", LabelSpec(column="class", positive_value="imU"))}


def fixture_path(name):
    """Path of a bundled CSV fixture."""
    from importlib.resources import files

    return Path(str(files("kdesampling") / "data" / FIXTURES[name][0]))


def load_fixture(name):
    """Load a bundled dataset by name (currently only ``"ecoli"``)."""
    if name not in FIXTURES:
        raise ConfigError(f"unknown fixture {name!r}; available: {sorted(FIXTURES)}")
    return load_csv(fixture_path(name), FIXTURES[name][1])
