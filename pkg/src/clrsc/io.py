"""Matrix CSV files and dataset manifests."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .datagen import MultiViewDataset
from .errors import DataError


def load_matrix_csv(path) -> np.ndarray:
    """Read a headerless, rectangular, comma-separated numeric matrix."""
    path = Path(path)
    rows = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not cell.strip() for cell in row):
                    continue
                values = []
                for col, cell in enumerate(row, start=1):
                    try:
                        values.append(float(cell))
                    except ValueError:
                        raise DataError(f"{path}:{lineno}:{col}: non-numeric token {cell.strip()!r}") from None
                if rows and len(values) != len(rows[0]):
                    raise DataError(f"{path}:{lineno}: expected {len(rows[0])} columns, found {len(values)}")
                rows.append(values)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty matrix file")
    m = np.array(rows, dtype=float)
    if not np.all(np.isfinite(m)):
        raise DataError(f"{path}: matrix contains non-finite values")
    return m


def write_matrix_csv(path, m):
    m = np.atleast_2d(np.asarray(m, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in m:
            w.writerow([repr(float(x)) for x in row])


def load_labels(path) -> np.ndarray:
    m = load_matrix_csv(path)
    if min(m.shape) != 1:
        raise DataError(f"{path}: labels must be a single row or column, got {m.shape}")
    labels = m.ravel()
    if not np.all(labels == np.round(labels)):
        raise DataError(f"{path}: labels must be integers")
    return labels.astype(int)


def write_labels(path, labels):
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(f"{int(v)}\n" for v in np.ravel(labels))


def read_manifest(path) -> dict:
    """Parse ``key = value`` lines; ``view`` may repeat, ``#`` starts a comment."""
    path = Path(path)
    entries = {"view": []}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "view":
            entries["view"].append(value)
        elif key in ("labels", "k"):
            if key in entries:
                raise DataError(f"{path}:{lineno}: duplicate key {key!r}")
            entries[key] = value
        else:
            raise DataError(f"{path}:{lineno}: unknown key {key!r}")
    return entries


def load_dataset(manifest) -> MultiViewDataset:
    manifest = Path(manifest)
    entries = read_manifest(manifest)
    base = manifest.parent
    if not entries["view"]:
        raise DataError(f"{manifest}: no 'view' entries")
    if "k" not in entries:
        raise DataError(f"{manifest}: missing required key 'k'")
    try:
        k = int(entries["k"])
    except ValueError:
        raise DataError(f"{manifest}: k must be an integer, got {entries['k']!r}") from None
    if k < 1:
        raise DataError(f"{manifest}: k must be positive")

    paths = [base / p for p in entries["view"]]
    views = [load_matrix_csv(p) for p in paths]
    n = views[0].shape[1]
    for p, v in zip(paths[1:], views[1:]):
        if v.shape[1] != n:
            raise DataError(f"shape mismatch: {paths[0]} has N={n} columns but {p} has N={v.shape[1]}")

    labels = None
    if "labels" in entries:
        lpath = base / entries["labels"]
        labels = load_labels(lpath)
        if labels.size != n:
            raise DataError(f"{lpath}: {labels.size} labels for N={n} samples")
        if labels.min() < 1 or labels.max() > k:
            raise DataError(f"{lpath}: labels must lie in 1..{k}")
    return MultiViewDataset(views, labels, k)


def write_dataset(directory, dataset: MultiViewDataset, stem="view") -> Path:
    """Write views, labels and a manifest into ``directory``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for i, X in enumerate(dataset.views, start=1):
        name = f"{stem}{i}.csv"
        write_matrix_csv(directory / name, X)
        lines.append(f"view = {name}")
    if dataset.labels is not None:
        write_labels(directory / "labels.csv", dataset.labels)
        lines.append("labels = labels.csv")
    lines.append(f"k = {dataset.k}")
    manifest = directory / "dataset.txt"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
