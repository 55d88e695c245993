"""Dataset loading, validation and min-max normalization."""
from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

BUILTIN_DATASETS = {
    "iris": ("iris.csv", "species"),
    "breast_cancer": ("breast_cancer.csv", "diagnosis"),
}


class DataError(ValueError):
    """Raised for unreadable or malformed datasets."""


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    class_names: tuple
    normalized: bool = False
    # per-column (min, max) recorded by normalize_minmax
    scale: Optional[tuple] = field(default=None, compare=False)

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"feature matrix must be N x D with N, D >= 1, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"expected {X.shape[0]} labels, got {y.shape}")
        if len(self.feature_names) != X.shape[1]:
            raise DataError("feature_names length does not match feature count")
        if y.min() < 0 or y.max() >= len(self.class_names):
            raise DataError("labels must lie in [0, number of classes)")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def subset(self, rows) -> "Dataset":
        return replace(self, features=self.features[rows], labels=self.labels[rows])

    def digest(self) -> str:
        """sha256 over features, labels and names; used for report provenance."""
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.features).tobytes())
        h.update(np.ascontiguousarray(self.labels).tobytes())
        h.update("\x1f".join(self.feature_names).encode())
        h.update("\x1f".join(self.class_names).encode())
        return h.hexdigest()


def load_csv(path, label_column: Union[str, int] = -1, has_header: bool = True) -> Dataset:
    """Read a comma-separated file into a Dataset.

    ``label_column`` is a header name or a zero-based index (negative indices
    count from the end). Class labels are mapped to integer ids in order of
    first appearance. Errors carry 1-based row numbers as they appear in the
    file and zero-based column indices.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh)]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    first_line = 1
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in rows[0]]
        rows = rows[1:]
        first_line = 2
    else:
        header = None
    # skip fully blank lines but keep file line numbers
    numbered = [(first_line + i, r) for i, r in enumerate(rows) if any(c.strip() for c in r)]
    if not numbered:
        raise DataError(f"{path}: no data rows")
    width = len(header) if header is not None else len(numbered[0][1])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column and a label column")

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None:
            raise DataError(f"{path}: label column {label_column!r} given by name but file has no header")
        if label_column not in header:
            raise DataError(f"{path}: unknown label column {label_column!r}; columns are {header}")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise DataError(f"{path}: label column index {label_idx} out of range for {width} columns")
        label_idx %= width

    feature_cols = [c for c in range(width) if c != label_idx]
    names = [header[c] for c in feature_cols] if header is not None else [f"f{c}" for c in feature_cols]

    X = np.empty((len(numbered), len(feature_cols)))
    class_ids: dict[str, int] = {}
    y = np.empty(len(numbered), dtype=np.int64)
    for i, (line, row) in enumerate(numbered):
        if len(row) != width:
            raise DataError(f"{path}: row {line} has {len(row)} cells, expected {width}")
        for j, c in enumerate(feature_cols):
            cell = row[c].strip()
            try:
                X[i, j] = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {line}, column {c}: non-numeric value {cell!r}") from None
        label = row[label_idx].strip()
        y[i] = class_ids.setdefault(label, len(class_ids))
    return Dataset(X, y, tuple(names), tuple(class_ids))


def write_csv(dataset: Dataset, path, label_name: str = "label") -> None:
    """Export in the format load_csv reads (header row, label last, exact float repr)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(dataset.feature_names) + [label_name])
        for row, lab in zip(dataset.features, dataset.labels):
            w.writerow([repr(float(v)) for v in row] + [dataset.class_names[lab]])


def load_builtin(name: str) -> Dataset:
    """Load one of the bundled CSVs (``iris`` or ``breast_cancer``)."""
    try:
        fname, label = BUILTIN_DATASETS[name]
    except KeyError:
        raise DataError(f"unknown builtin dataset {name!r}; choose from {sorted(BUILTIN_DATASETS)}") from None
    with resources.as_file(resources.files("bcddo.datasets") / fname) as p:
        return load_csv(p, label)


def resolve_dataset(spec: str, label_column: Union[str, int] = -1) -> Dataset:
    """Path to a CSV, or ``builtin:<name>``."""
    if spec.startswith("builtin:"):
        return load_builtin(spec.split(":", 1)[1])
    return load_csv(spec, label_column)


def minmax_params(features: np.ndarray):
    return features.min(axis=0), features.max(axis=0)


def apply_minmax(features: np.ndarray, lo: np.ndarray, hi: np.ndarray, clip: bool = False) -> np.ndarray:
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (features - lo) / safe, 0.0)
    if clip:
        out = np.clip(out, 0.0, 1.0)
    return out


def normalize_minmax(dataset: Dataset, params=None) -> Dataset:
    """Map each column to [0, 1] by (x - min) / (max - min).

    Constant columns map to 0. ``params`` lets a caller apply (min, max)
    computed elsewhere, e.g. on a training split; values outside that range
    are clipped so the result still lies in [0, 1].
    """
    if dataset.normalized:
        raise DataError("dataset is already normalized")
    if params is None:
        lo, hi = minmax_params(dataset.features)
        X = apply_minmax(dataset.features, lo, hi)
    else:
        lo, hi = (np.asarray(p, dtype=float) for p in params)
        X = apply_minmax(dataset.features, lo, hi, clip=True)
    return replace(dataset, features=X, normalized=True, scale=(lo, hi))


def denormalize(dataset: Dataset) -> np.ndarray:
    if not dataset.normalized or dataset.scale is None:
        raise DataError("dataset carries no normalization parameters")
    lo, hi = dataset.scale
    return lo + dataset.features * (hi - lo)


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    kind: str
    message: str
    location: Optional[tuple] = None


def validate(dataset: Dataset, imbalance_ratio: float = 1.5) -> list:
    """Return a list of Findings; never raises."""
    findings = []
    bad = np.argwhere(~np.isfinite(dataset.features))
    for r, c in bad:
        findings.append(Finding("error", "non-finite", f"non-finite value at row {r}, column {c}", (int(r), int(c))))

    counts = np.bincount(dataset.labels, minlength=dataset.n_classes)
    present = counts[counts > 0]
    if len(present) and present.max() / present.min() > imbalance_ratio:
        findings.append(Finding(
            "warning", "imbalance",
            f"class sizes {counts.tolist()} exceed max/min ratio {imbalance_ratio}",
        ))
    if len(present) < dataset.n_classes:
        findings.append(Finding("warning", "empty-class", "some declared classes have no samples"))

    rows = np.column_stack([dataset.features, dataset.labels])
    _, first, inverse, cnt = np.unique(rows, axis=0, return_index=True, return_inverse=True, return_counts=True)
    inverse = np.ravel(inverse)
    for g in np.flatnonzero(cnt > 1):
        dup_rows = np.flatnonzero(inverse == g).tolist()
        findings.append(Finding("warning", "duplicate", f"duplicate rows {dup_rows}", tuple(dup_rows)))
    return findings


def class_counts(labels: Sequence[int], n_classes: int) -> np.ndarray:
    return np.bincount(np.asarray(labels), minlength=n_classes)
