"""Dataset loading, feature scaling, one-hot targets and fold assignment."""

import csv
from dataclasses import dataclass, field
from importlib import resources
import math

import numpy as np

from .errors import DataFormatError, InvalidArgumentError

BUNDLED = ("iris", "wine")


@dataclass
class Dataset:
    features: np.ndarray  # (N, D)
    labels: np.ndarray  # (N,) ints in 0..C-1
    n_classes: int
    feature_names: list = field(default_factory=list)
    label_names: list = field(default_factory=list)  # label_names[k] is the raw label of class k

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if not self.feature_names:
            self.feature_names = [f"x{d}" for d in range(self.features.shape[1])]
        if not self.label_names:
            self.label_names = [str(k) for k in range(self.n_classes)]

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, rows):
        return Dataset(self.features[rows], self.labels[rows], self.n_classes,
                       list(self.feature_names), list(self.label_names))


def _parse_rows(reader, source, label_column):
    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError(f"{source}: empty file (a header row is required)") from None
    header = [h.strip() for h in header]
    if label_column not in header:
        raise DataFormatError(f"{source}: label column {label_column!r} not found in header {header}")
    li = header.index(label_column)
    names = [h for i, h in enumerate(header) if i != li]
    rows, raw_labels = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(
                f"{source}: row {lineno} has {len(row)} cells, header has {len(header)}"
            )
        values = []
        for i, cell in enumerate(row):
            if i == li:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{source}: row {lineno}, column {header[i]!r}: non-numeric value {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise DataFormatError(
                    f"{source}: row {lineno}, column {header[i]!r}: non-finite value {cell!r}"
                )
            values.append(v)
        rows.append(values)
        raw_labels.append(row[li].strip())
    return names, rows, raw_labels


def load_csv(path, label_column="class"):
    """Read a headed, comma-separated file of numeric features and one label column.

    Labels are mapped to 0-based class indices in order of first appearance.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        names, rows, raw = _parse_rows(csv.reader(fh), str(path), label_column)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    label_names = list(dict.fromkeys(raw))
    lookup = {lab: k for k, lab in enumerate(label_names)}
    labels = np.array([lookup[lab] for lab in raw], dtype=int)
    return Dataset(np.array(rows, dtype=float), labels, len(label_names), names, label_names)


def save_csv(dataset, path, label_column="class"):
    """Write a dataset in the format :func:`load_csv` reads (raw label names in the last column)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(dataset.feature_names) + [label_column])
        for row, lab in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [dataset.label_names[lab]])


def bundled_path(name):
    if name not in BUNDLED:
        raise InvalidArgumentError(f"no bundled dataset {name!r}; available: {BUNDLED}")
    return resources.files("adatsk") / "datasets" / f"{name}.csv"


def load_bundled(name):
    """Load one of the bundled UCI datasets (``"iris"`` or ``"wine"``)."""
    with resources.as_file(bundled_path(name)) as p:
        return load_csv(p, "class")


def read_feature_csv(path, columns):
    """Read the named numeric columns from a headed CSV (extra columns ignored).

    Returns an ``(N, len(columns))`` array; raises :class:`DataFormatError`
    listing any missing columns.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            return np.zeros((0, len(columns)))
        missing = [c for c in columns if c not in header]
        if missing:
            raise DataFormatError(f"{path}: missing feature column(s): {', '.join(missing)}")
        pos = [header.index(c) for c in columns]
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                out.append([float(row[i]) for i in pos])
            except (ValueError, IndexError):
                raise DataFormatError(f"{path}: row {lineno}: bad or missing numeric value") from None
    return np.array(out, dtype=float).reshape(len(out), len(columns))


@dataclass
class NormalizationStats:
    """Per-feature scaling fitted on a training split.

    For ``minmax`` ``a``/``b`` are the min and max; for ``zscore`` the mean
    and standard deviation.
    """

    mode: str
    a: np.ndarray
    b: np.ndarray

    def to_dict(self):
        return {"mode": self.mode, "a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["mode"], np.asarray(d["a"], dtype=float), np.asarray(d["b"], dtype=float))

    def take(self, columns):
        return NormalizationStats(self.mode, self.a[columns], self.b[columns])


def fit_normalization(train_features, mode="minmax"):
    X = np.atleast_2d(np.asarray(train_features, dtype=float))
    if mode == "minmax":
        return NormalizationStats(mode, X.min(axis=0), X.max(axis=0))
    if mode == "zscore":
        return NormalizationStats(mode, X.mean(axis=0), X.std(axis=0))
    raise InvalidArgumentError(f"unknown normalization mode {mode!r}")


def minmax_normalize(features, stats):
    """Scale with training statistics; no clipping, constant features map to 0."""
    X = np.atleast_2d(np.asarray(features, dtype=float))
    if stats.mode == "minmax":
        scale = stats.b - stats.a
    else:
        scale = stats.b
    safe = np.where(scale > 0, scale, 1.0)
    return np.where(scale > 0, (X - stats.a) / safe, 0.0)


normalize = minmax_normalize


def one_hot(labels, C):
    labels = np.asarray(labels, dtype=int)
    if labels.size and (labels.min() < 0 or labels.max() >= C):
        raise InvalidArgumentError(f"one_hot: labels must lie in 0..{C - 1}")
    out = np.zeros((labels.shape[0], C))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def kfold_split(dataset_or_labels, folds, seed=0):
    """Stratified random fold assignment.

    Instances are shuffled with ``seed`` and each class is dealt
    round-robin over the folds; the dealing position carries over between
    classes so overall fold sizes also differ by at most one.

    Returns an int array giving the fold of every instance.
    """
    labels = getattr(dataset_or_labels, "labels", dataset_or_labels)
    labels = np.asarray(labels, dtype=int)
    N = labels.shape[0]
    if folds < 1 or N < folds:
        raise InvalidArgumentError(f"kfold_split: need 1 <= folds <= N (folds={folds}, N={N})")
    rng = np.random.default_rng(seed)
    order = rng.permutation(N)
    assign = np.empty(N, dtype=int)
    pos = 0
    for c in np.unique(labels):
        members = order[labels[order] == c]
        assign[members] = (pos + np.arange(members.size)) % folds
        pos = (pos + members.size) % folds
    return assign


def make_high_dim_dataset(n_samples=60, n_features=7129, n_classes=2, n_informative=20,
                          flip=0.1, noise=0.05, seed=0):
    """Synthetic microarray-style data with ``n_informative`` class-driven features.

    Every feature is an on/off level (0 or 1) plus Gaussian noise.  The
    first ``n_informative`` columns follow a per-class on/off pattern with
    a fraction ``flip`` of switched entries; all other columns are switched
    at random.  Classes are balanced.
    """
    if not 1 <= n_informative <= n_features:
        raise InvalidArgumentError("n_informative must lie in 1..n_features")
    if n_samples < n_classes or n_classes < 2:
        raise InvalidArgumentError("need at least two classes and one sample per class")
    rng = np.random.default_rng(seed)
    labels = np.arange(n_samples) % n_classes
    rng.shuffle(labels)
    state = rng.random((n_samples, n_features)) < 0.5
    codes = rng.random((n_classes, n_informative)) < 0.5
    codes[1] = ~codes[0]  # the first two classes disagree on every informative feature
    flips = rng.random((n_samples, n_informative)) < flip
    state[:, :n_informative] = codes[labels] ^ flips
    X = state + rng.normal(0.0, noise, size=state.shape)
    names = [f"inf{j}" if j < n_informative else f"g{j}" for j in range(n_features)]
    return Dataset(X, labels, n_classes, names)
