"""Dataset ingestion and synthetic generation."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..engine import Dataset
from ..errors import IngestionError

FORMATS = ("auto", "int", "csv")


def _resolve_format(path, fmt):
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    if fmt != "auto":
        return fmt
    return "csv" if Path(path).suffix.lower() == ".csv" else "int"


def _read_ints(path):
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError:
                raise IngestionError(f"expected an integer item index, got {text!r}", lineno) from None
            if value < 1:
                raise IngestionError(f"item indices start at 1, got {value}", lineno)
            values.append(value)
    return values, None


def _read_categories(path, column, header):
    index = {}
    values = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if column >= len(row):
                raise IngestionError(f"row has {len(row)} column(s), column {column} requested", lineno)
            label = row[column].strip()
            if not label:
                raise IngestionError("empty category", lineno)
            values.append(index.setdefault(label, len(index) + 1))
    return values, list(index)


def load_dataset(path, format="auto", d=None, column=0, header=False):
    """Read a dataset file.

    ``format="int"`` expects one positive item index per line. ``"csv"``
    reads string categories from ``column`` and numbers them ``1, 2, ...`` in
    order of first appearance. ``"auto"`` picks csv for ``.csv`` files.

    Returns the :class:`Dataset`; for csv input the category labels are
    available as ``dataset.labels``.
    """
    fmt = _resolve_format(path, format)
    if fmt == "int":
        values, labels = _read_ints(path)
    else:
        values, labels = _read_categories(path, column, header)
    if not values:
        raise IngestionError(f"{path}: no records found")
    observed = max(values)
    if d is None:
        d = observed
    elif d < observed:
        raise IngestionError(f"d={d} is smaller than the largest item {observed}")
    return Dataset(np.asarray(values, dtype=np.int64), int(d), tuple(labels) if labels else None)


def save_dataset(dataset, path):
    """Write one item index per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{v}\n" for v in dataset.values.tolist())


def zipf_probabilities(d, exponent):
    weights = np.arange(1, d + 1, dtype=float) ** (-float(exponent))
    return weights / weights.sum()


def synth_zipf(n, d, exponent=1.0, seed=None):
    """``n`` i.i.d. items with ``P(k)`` proportional to ``k ** -exponent``."""
    if exponent < 0:
        raise ValueError("exponent must be >= 0")
    rng = np.random.default_rng(seed)
    values = rng.choice(np.arange(1, d + 1), size=int(n), p=zipf_probabilities(d, exponent))
    return Dataset(values, int(d))
