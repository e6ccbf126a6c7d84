"""Synthetic 2-D classification datasets and CSV ingestion."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError("features must be 2-D")
        if y.shape != (X.shape[0],):
            raise ValueError("labels must match feature rows")
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_points(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def both_classes(self) -> bool:
        return bool((self.labels == 1).any() and (self.labels == -1).any())


def gen_circles(n: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Half the points on a noisy unit circle (+1), half in a blob at the
    origin (-1)."""
    if n < 2:
        raise ValueError("need at least 2 points")
    rng = np.random.default_rng(seed)
    n_out = n // 2
    n_in = n - n_out
    angles = rng.uniform(0.0, 2.0 * np.pi, n_out)
    radii = 1.0 + rng.normal(0.0, noise, n_out)
    outer = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    inner = rng.normal(0.0, noise, (n_in, 2))
    X = np.vstack([outer, inner])
    y = np.concatenate([np.ones(n_out, dtype=np.int64), -np.ones(n_in, dtype=np.int64)])
    return Dataset(X, y, name="circles")


def gen_quadrants(n: int, seed: int = 0) -> Dataset:
    """Uniform points in [-1,1]^2, -1 in the first and third quadrants.

    Points on the axes get +1.
    """
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, (n, 2))
    prod = X[:, 0] * X[:, 1]
    y = np.where(prod > 0.0, -1, 1).astype(np.int64)
    return Dataset(X, y, name="quadrants")


def gen_bands(
    n: int,
    seed: int = 0,
    offsets: Sequence[float] = (-0.8, 0.0, 0.8),
    width: float = 0.35,
) -> Dataset:
    """Three overlapping Gaussian bands parallel to the x2 = x1 diagonal.

    The transverse coordinate u = (x2 - x1)/sqrt(2) is Gaussian around each
    band's offset; labels alternate +1, -1, +1.
    """
    offsets = tuple(float(o) for o in offsets)
    if len(offsets) != 3 or not (offsets[0] < offsets[1] < offsets[2]):
        raise ValueError("offsets must be three strictly increasing values")
    rng = np.random.default_rng(seed)
    base = n // 3
    sizes = [base + (1 if k < n % 3 else 0) for k in range(3)]
    labels = (1, -1, 1)
    xs, ys = [], []
    sqrt2 = np.sqrt(2.0)
    for size, off, lab in zip(sizes, offsets, labels):
        u = off + rng.normal(0.0, width, size)
        v = rng.uniform(-sqrt2, sqrt2, size)
        x1 = (v - u) / sqrt2
        x2 = (v + u) / sqrt2
        xs.append(np.column_stack([x1, x2]))
        ys.append(np.full(size, lab, dtype=np.int64))
    return Dataset(np.vstack(xs), np.concatenate(ys), name="bands")


GENERATORS = ("circles", "quadrants", "bands")


def gen_dataset(name: str, n: int = 200, noise: float = 0.1, seed: int = 0) -> Dataset:
    if name == "circles":
        return gen_circles(n, noise=noise, seed=seed)
    if name == "quadrants":
        return gen_quadrants(n, seed=seed)
    if name == "bands":
        return gen_bands(n, seed=seed)
    raise ValueError(f"unknown dataset {name!r}; generators are {GENERATORS}")


class CsvFormatError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        super().__init__(message)
        self.line_no = line_no


_DEFAULT_LABEL_MAP = {
    "1": 1, "+1": 1, "1.0": 1, "-1": -1, "-1.0": -1, "0": -1, "0.0": -1,
    "signal": 1, "background": -1,
}


def _parse_label(raw: str, label_map: Mapping[str, int] | None, line_no: int) -> int:
    key = raw.strip()
    table = label_map if label_map is not None else _DEFAULT_LABEL_MAP
    lookup = key if label_map is not None else key.lower()
    if lookup not in table:
        raise CsvFormatError(
            f"line {line_no}: label {raw!r} not in the label map", line_no
        )
    val = int(table[lookup])
    if val not in (-1, 1):
        raise CsvFormatError(
            f"line {line_no}: label map must target -1 or +1", line_no
        )
    return val


def loads_csv(
    text: str,
    feature_cols: Sequence[str] | None = None,
    label_col: str = "label",
    label_map: Mapping[str, int] | None = None,
    name: str = "csv",
) -> Dataset:
    """Parse CSV text with a header row into a Dataset.

    feature_cols defaults to every column except the label.  Unmapped or
    non-numeric cells fail with their line number.  Label values are matched
    through label_map; the default map covers 1/-1, 1/0, signal/background.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file: a header row is required") from None
    header = [h.strip() for h in header]
    if label_col not in header:
        raise CsvFormatError(f"label column {label_col!r} not in header {header}")
    if feature_cols is None:
        feature_cols = [h for h in header if h != label_col]
    missing = [c for c in feature_cols if c not in header]
    if missing:
        raise CsvFormatError(f"feature columns {missing} not in header {header}")
    if not feature_cols:
        raise CsvFormatError("no feature columns left after removing the label")
    fidx = [header.index(c) for c in feature_cols]
    lidx = header.index(label_col)

    rows: list[list[float]] = []
    labels: list[int] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise CsvFormatError(
                f"line {line_no}: expected {len(header)} cells, got {len(row)}",
                line_no,
            )
        feats = []
        for k in fidx:
            cell = row[k].strip()
            try:
                feats.append(float(cell))
            except ValueError:
                raise CsvFormatError(
                    f"line {line_no}: non-numeric cell {cell!r} in column "
                    f"{header[k]!r}",
                    line_no,
                ) from None
        rows.append(feats)
        labels.append(_parse_label(row[lidx], label_map, line_no))
    if not rows:
        raise CsvFormatError("no data rows")
    return Dataset(np.array(rows), np.array(labels, dtype=np.int64), name=name)


def load_csv(
    path: str,
    feature_cols: Sequence[str] | None = None,
    label_col: str = "label",
    label_map: Mapping[str, int] | None = None,
) -> Dataset:
    with open(path, "r", newline="") as fh:
        text = fh.read()
    return loads_csv(
        text, feature_cols=feature_cols, label_col=label_col,
        label_map=label_map, name=path,
    )


def dumps_csv(dataset: Dataset, feature_names: Sequence[str] | None = None) -> str:
    names = (
        list(feature_names)
        if feature_names is not None
        else [f"x{k + 1}" for k in range(dataset.n_features)]
    )
    if len(names) != dataset.n_features:
        raise ValueError("feature_names length mismatch")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names + ["label"])
    for row, lab in zip(dataset.features, dataset.labels):
        writer.writerow([repr(float(v)) for v in row] + [int(lab)])
    return buf.getvalue()


def save_csv(dataset: Dataset, path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dumps_csv(dataset))
