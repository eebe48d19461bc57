"""Datasets, CSV ingestion, and deterministic seeded random streams."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

REGRESSION = "regression"
CLASSIFICATION = "classification"
TASKS = (REGRESSION, CLASSIFICATION)


class DataError(ValueError):
    """Malformed input data or data file."""


@dataclass(frozen=True)
class Dataset:
    """An n-by-p predictor matrix with a length-n response.

    The matrix is held column-major so that split search touches one
    variable's values contiguously. Arrays are frozen after construction,
    which makes a Dataset safe to share across worker processes or threads.
    """

    x: np.ndarray
    y: np.ndarray
    task: str = REGRESSION
    names: list[str] = field(default=None)

    def __post_init__(self):
        x = np.asfortranarray(self.x, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if x.ndim != 2:
            raise DataError("predictor matrix must be 2-dimensional")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DataError("response length must match the number of rows")
        n, p = x.shape
        if n < 2:
            raise DataError("need at least 2 samples")
        if p < 1:
            raise DataError("need at least 1 variable")
        if not np.isfinite(x).all():
            raise DataError("predictor matrix contains NaN or Inf")
        if not np.isfinite(y).all():
            raise DataError("response contains NaN or Inf")
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.task == CLASSIFICATION and not np.isin(y, (0.0, 1.0)).all():
            raise DataError("classification response must contain only 0 and 1")
        names = self.names
        if names is None:
            names = [f"x{i + 1}" for i in range(p)]
        names = [str(c) for c in names]
        if len(names) != p:
            raise DataError("one name per variable expected")
        if len(set(names)) != p:
            raise DataError("variable names must be unique")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    @property
    def n_vars(self) -> int:
        return self.x.shape[1]

    def var_index(self, name_or_index) -> int:
        """Resolve a variable name or integer index to an index."""
        if isinstance(name_or_index, (int, np.integer)):
            i = int(name_or_index)
            if not 0 <= i < self.n_vars:
                raise DataError(f"variable index {i} out of range")
            return i
        try:
            return self.names.index(str(name_or_index))
        except ValueError:
            raise DataError(f"unknown variable {name_or_index!r}") from None


@dataclass(frozen=True)
class SeedContext:
    """Hierarchical, counter-keyed derivation of independent random streams.

    A child stream is a pure function of the master seed and the integer key
    path, never of how many streams were created before it, so results do not
    depend on scheduling or worker count. Distinct key paths give distinct,
    statistically independent streams.
    """

    master_seed: int
    key: tuple = ()

    def child(self, *ids) -> "SeedContext":
        return SeedContext(self.master_seed, self.key + tuple(int(i) for i in ids))

    def rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(seq))


def as_seed(seed) -> SeedContext:
    """Accept either an integer master seed or an existing SeedContext."""
    if isinstance(seed, SeedContext):
        return seed
    return SeedContext(int(seed))


def permute_column(values, rng) -> np.ndarray:
    """Uniform random permutation of a vector (multiset preserved)."""
    values = np.asarray(values)
    if values.shape[0] < 1:
        raise DataError("cannot permute an empty vector")
    return rng.permutation(values)


def _parse_cell(text, row, col_name):
    try:
        v = float(text)
    except ValueError:
        raise DataError(
            f"non-numeric value {text!r} at row {row}, column {col_name!r}"
        ) from None
    if not np.isfinite(v):
        raise DataError(f"non-finite value {text!r} at row {row}, column {col_name!r}")
    return v


def load_csv(path, response, task=REGRESSION) -> Dataset:
    """Load a headered CSV file into a Dataset.

    `response` selects the response column by header name or integer
    position; the remaining columns become predictors in file order. Row
    numbers in error messages count the header as row 1.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if isinstance(response, (int, np.integer)):
            r_idx = int(response)
            if not 0 <= r_idx < len(header):
                raise DataError(f"response column index {r_idx} out of range")
        else:
            if response not in header:
                raise DataError(f"response column {response!r} not in header")
            r_idx = header.index(response)
        names = [h for i, h in enumerate(header) if i != r_idx]
        rows = []
        ys = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DataError(
                    f"row {lineno} has {len(record)} fields, expected {len(header)}"
                )
            vals = [
                _parse_cell(cell, lineno, header[i]) for i, cell in enumerate(record)
            ]
            yv = vals.pop(r_idx)
            if task == CLASSIFICATION and yv not in (0.0, 1.0):
                raise DataError(
                    f"classification response must be 0 or 1, got {yv!r} at row {lineno}"
                )
            rows.append(vals)
            ys.append(yv)
    if not rows:
        raise DataError(f"{path}: no data rows")
    x = np.array(rows, dtype=np.float64)
    if x.shape[1] < 1:
        raise DataError("file has no predictor columns")
    return Dataset(x=x, y=np.array(ys), task=task, names=names)


def save_csv(data: Dataset, path, response_name="y") -> None:
    """Write a Dataset as CSV with the response as the last column.

    Floats are serialized with shortest round-trip precision, so a
    save/load cycle reproduces every value bit-exactly.
    """
    if response_name in data.names:
        raise DataError(f"response name {response_name!r} clashes with a variable")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.names) + [response_name])
        for i in range(data.n_samples):
            row = [repr(float(v)) for v in data.x[i, :]]
            row.append(repr(float(data.y[i])))
            writer.writerow(row)
