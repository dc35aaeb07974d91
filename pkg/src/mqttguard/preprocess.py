"""Training-data preparation: categorical codes, splits, scaling, SMOTE.

The canonical order when preparing a run is: fit/apply categorical encoding
on the whole table, stratified 80/20 split, fit the min-max scaler on the
training partition only, scale both partitions, then SMOTE-balance the
training partition only. Every step is a pure function of its inputs and a
seed, so a prepared run can be replayed bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .dataset import Dataset, LabelEncoding
from .errors import (
    DegenerateClassError,
    FoldTooSmallError,
    MissingColumnError,
    NotFittedError,
    SchemaMismatchError,
)


def _rng(*entropy: int) -> np.random.Generator:
    """Deterministic generator for a (seed, counter...) tuple."""
    return np.random.default_rng(np.random.SeedSequence(entropy))


# --------------------------------------------------------------------------
# categorical encoding
# --------------------------------------------------------------------------

class CategoricalEncoder(BaseEstimator, TransformerMixin):
    """Per-column label encoding for raw categorical values.

    Codes are assigned by sorted order of the distinct raw values seen at
    fit time, so the mapping does not depend on row order. Values never
    seen at fit time map to a reserved unknown code (max code + 1).
    """

    def __init__(self, columns: Sequence[str] = ()):
        self.columns = tuple(columns)

    def fit(self, ds: Dataset, y=None) -> "CategoricalEncoder":
        missing = [c for c in self.columns if c not in ds.feature_names]
        if missing:
            raise MissingColumnError(f"categorical columns not in schema: {missing}")
        self.maps_ = {}
        for col in self.columns:
            values = sorted(set(str(v) for v in ds.frame[col].tolist()))
            self.maps_[col] = {v: i for i, v in enumerate(values)}
        return self

    def transform(self, ds: Dataset) -> Dataset:
        if not hasattr(self, "maps_"):
            raise NotFittedError("CategoricalEncoder.transform before fit")
        frame = ds.frame.copy()
        for col, mapping in self.maps_.items():
            if col not in frame.columns:
                raise MissingColumnError(f"column {col!r} absent at transform time")
            unknown = len(mapping)
            frame[col] = np.array(
                [mapping.get(str(v), unknown) for v in frame[col].tolist()],
                dtype=np.float64,
            )
        return ds.replace_frame(frame)

    def unknown_code(self, column: str) -> int:
        return len(self.maps_[column])

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "maps": self.maps_}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CategoricalEncoder":
        enc = cls(columns=tuple(doc["columns"]))
        enc.maps_ = {col: {str(k): int(v) for k, v in m.items()} for col, m in doc["maps"].items()}
        return enc


# --------------------------------------------------------------------------
# min-max scaling
# --------------------------------------------------------------------------

class MinMaxScaler(BaseEstimator, TransformerMixin):
    """Per-column ``x -> (x - min) / (max - min)`` fitted on one partition.

    Constant columns map to 0. Values outside the fitted range are NOT
    clipped; test data may legitimately land outside [0, 1], and clipping
    would destroy their rank order.
    """

    def fit(self, X, y=None) -> "MinMaxScaler":
        values, names = _as_matrix(X)
        if values.shape[0] == 0:
            raise SchemaMismatchError("cannot fit scaler on an empty matrix")
        self.min_ = values.min(axis=0)
        self.max_ = values.max(axis=0)
        self.feature_names_ = names
        return self

    def transform(self, X):
        if not hasattr(self, "min_"):
            raise NotFittedError("MinMaxScaler.transform before fit")
        values, names = _as_matrix(X)
        if names is not None and self.feature_names_ is not None:
            if tuple(names) != tuple(self.feature_names_):
                raise SchemaMismatchError(
                    f"scaler fitted on {self.feature_names_}, got {tuple(names)}"
                )
        if values.shape[1] != len(self.min_):
            raise SchemaMismatchError(
                f"scaler fitted on {len(self.min_)} columns, got {values.shape[1]}"
            )
        span = self.max_ - self.min_
        scale = np.where(span > 0, span, 1.0)
        out = (values - self.min_) / scale
        out[:, span == 0] = 0.0
        if isinstance(X, Dataset):
            frame = pd.DataFrame(out, columns=list(X.feature_names))
            return X.replace_frame(frame)
        return out

    def to_dict(self) -> dict:
        return {
            "columns": list(self.feature_names_) if self.feature_names_ else None,
            "min": self.min_.tolist(),
            "max": self.max_.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "MinMaxScaler":
        sc = cls()
        sc.min_ = np.asarray(doc["min"], dtype=np.float64)
        sc.max_ = np.asarray(doc["max"], dtype=np.float64)
        cols = doc.get("columns")
        sc.feature_names_ = tuple(cols) if cols else None
        return sc


def _as_matrix(X) -> tuple[np.ndarray, tuple[str, ...] | None]:
    """Accept a Dataset or a 2-D array; return (float64 matrix, column names)."""
    if isinstance(X, Dataset):
        return X.matrix(), X.feature_names
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise SchemaMismatchError(f"expected 2-D feature matrix, got shape {arr.shape}")
    return arr, None


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    ratio: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "seed": self.seed,
            "train": self.train.tolist(),
            "test": self.test.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "SplitIndices":
        return cls(
            train=np.asarray(doc["train"], dtype=np.int64),
            test=np.asarray(doc["test"], dtype=np.int64),
            ratio=float(doc["ratio"]),
            seed=int(doc["seed"]),
        )


def _class_codes(labels: np.ndarray) -> np.ndarray:
    codes = np.asarray(labels)
    if codes.dtype == object:
        # map distinct names to temporary dense codes for stratification
        distinct = {v: i for i, v in enumerate(sorted(set(codes.tolist())))}
        codes = np.array([distinct[v] for v in codes.tolist()], dtype=np.int64)
    return codes.astype(np.int64)


def stratified_split(labels: np.ndarray, ratio: float, seed: int) -> SplitIndices:
    """Seeded stratified train/test split.

    The train partition gets round(ratio * n) rows in total, allocated
    per class by largest remainder so each class's train count is within
    one row of ratio * class_count.
    """
    if not 0.0 < ratio < 1.0:
        raise SchemaMismatchError(f"split ratio must be in (0, 1), got {ratio}")
    codes = _class_codes(labels)
    n = len(codes)
    classes, counts = np.unique(codes, return_counts=True)
    small = classes[counts < 2]
    if small.size:
        raise DegenerateClassError(f"classes with fewer than 2 rows: {small.tolist()}")

    n_train = int(round(ratio * n))
    exact = ratio * counts
    base = np.floor(exact).astype(np.int64)
    # keep both partitions populated for every class
    base = np.clip(base, 1, counts - 1)
    deficit = n_train - int(base.sum())
    remainders = exact - np.floor(exact)
    order = np.lexsort((classes, -remainders))  # largest remainder, then lowest code
    take = base.copy()
    i = 0
    while deficit != 0 and i < 4 * len(classes):
        c = order[i % len(classes)]
        if deficit > 0 and take[c] < counts[c] - 1:
            take[c] += 1
            deficit -= 1
        elif deficit < 0 and take[c] > 1:
            take[c] -= 1
            deficit += 1
        i += 1

    rng = _rng(seed)
    train_parts, test_parts = [], []
    for cls, t in zip(classes, take):
        idx = np.flatnonzero(codes == cls)
        perm = idx[rng.permutation(len(idx))]
        train_parts.append(perm[:t])
        test_parts.append(perm[t:])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    return SplitIndices(train=train, test=test, ratio=ratio, seed=seed)


def stratified_fold_ids(labels: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Assign each row a fold id in [0, n_folds), preserving class balance.

    Every class must have at least ``n_folds`` rows so each fold sees
    every class.
    """
    if n_folds < 2:
        raise FoldTooSmallError(f"need >= 2 folds, got {n_folds}")
    codes = _class_codes(labels)
    classes, counts = np.unique(codes, return_counts=True)
    small = classes[counts < n_folds]
    if small.size:
        raise FoldTooSmallError(
            f"classes with fewer rows than folds={n_folds}: {small.tolist()}"
        )
    rng = _rng(seed)
    fold_ids = np.empty(len(codes), dtype=np.int64)
    for cls in classes:
        idx = np.flatnonzero(codes == cls)
        perm = idx[rng.permutation(len(idx))]
        fold_ids[perm] = np.arange(len(perm)) % n_folds
    return fold_ids


# --------------------------------------------------------------------------
# SMOTE
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise DegenerateClassError("SMOTE needs k_neighbors >= 1")


def _nearest_same_class(Xc: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest neighbors (self excluded) within one class."""
    m = Xc.shape[0]
    sq = np.einsum("ij,ij->i", Xc, Xc)
    out = np.empty((m, k), dtype=np.int64)
    block = max(1, min(m, 2_000_000 // max(m, 1)))
    for start in range(0, m, block):
        stop = min(start + block, m)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (Xc[start:stop] @ Xc.T)
        np.maximum(d2, 0.0, out=d2)
        for r in range(stop - start):
            row = d2[r]
            i = start + r
            if m - 1 == k:
                cand = np.delete(np.arange(m), i)
                cand = cand[np.lexsort((cand, row[cand]))]
            else:
                part = np.argpartition(row, k)[: k + 1]
                # order candidates by (distance, index) for determinism
                part = part[np.lexsort((part, row[part]))]
                cand = part[part != i][:k]
            out[i] = cand[:k]
    return out


class SmoteOversampler(BaseEstimator):
    """Synthetic minority oversampling to a uniform class histogram.

    Each synthetic row is ``x + u * (x_nn - x)`` with ``u ~ Uniform[0, 1]``
    and ``x_nn`` one of the k nearest same-class neighbors by Euclidean
    distance. Original rows pass through untouched; synthetic rows are
    appended grouped by class code. A class with fewer than k+1 rows uses
    k = class_count - 1 instead.
    """

    def __init__(self, k_neighbors: int = 5, seed: int = 0):
        self.k_neighbors = k_neighbors
        self.seed = seed

    def fit_resample(self, X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if self.k_neighbors < 1:
            raise DegenerateClassError("k_neighbors must be >= 1")
        classes, counts = np.unique(y, return_counts=True)
        single = classes[counts < 2]
        if single.size:
            raise DegenerateClassError(
                f"cannot oversample classes with < 2 rows: {single.tolist()}"
            )
        target = int(counts.max())
        new_X, new_y = [X], [y]
        anchors, partners = [], []
        for cls, m in zip(classes, counts):
            need = target - int(m)
            if need == 0:
                continue
            rng = _rng(self.seed, int(cls))
            idx = np.flatnonzero(y == cls)
            Xc = X[idx]
            k = min(self.k_neighbors, int(m) - 1)
            neighbors = _nearest_same_class(Xc, k)
            base = rng.integers(0, int(m), size=need)
            pick = rng.integers(0, k, size=need)
            u = rng.random(need)
            anchor = Xc[base]
            partner = Xc[neighbors[base, pick]]
            new_X.append(anchor + u[:, None] * (partner - anchor))
            new_y.append(np.full(need, cls, dtype=np.int64))
            anchors.append(idx[base])
            partners.append(idx[neighbors[base, pick]])
        # original-row indices of each synthetic row's two parents, in
        # output order; lets callers audit the interpolation geometry
        self.anchor_rows_ = np.concatenate(anchors) if anchors else np.empty(0, dtype=np.int64)
        self.partner_rows_ = np.concatenate(partners) if partners else np.empty(0, dtype=np.int64)
        if len(new_X) == 1:
            return X.copy(), y.copy()
        return np.vstack(new_X), np.concatenate(new_y)


def smote_oversample(ds: Dataset, cfg: SmoteConfig) -> Dataset:
    """Dataset-level SMOTE; requires encoded labels and numeric columns."""
    X, y = ds.matrix(), ds.labels
    Xr, yr = SmoteOversampler(cfg.k_neighbors, cfg.seed).fit_resample(X, y)
    frame = pd.DataFrame(Xr, columns=list(ds.feature_names))
    return replace(ds, frame=frame, labels=yr)


# --------------------------------------------------------------------------
# replayable artifacts
# --------------------------------------------------------------------------

ARTIFACTS_VERSION = 1


@dataclass
class PreprocessArtifacts:
    """Everything needed to replay a prepared run deterministically."""

    target_column: str
    classes_kept: tuple[str, ...]
    label_encoding: LabelEncoding
    encoder: CategoricalEncoder
    scaler: MinMaxScaler
    split: SplitIndices
    smote: SmoteConfig | None

    def to_json(self, path: str | Path) -> None:
        doc = {
            "version": ARTIFACTS_VERSION,
            "target_column": self.target_column,
            "classes_kept": list(self.classes_kept),
            "label_encoding": self.label_encoding.to_dict(),
            "categorical": self.encoder.to_dict(),
            "scaler": self.scaler.to_dict(),
            "split": self.split.to_dict(),
            "smote": (
                {"k_neighbors": self.smote.k_neighbors, "seed": self.smote.seed}
                if self.smote
                else None
            ),
        }
        Path(path).write_text(json.dumps(doc, indent=2))

    @classmethod
    def from_json(cls, path: str | Path) -> "PreprocessArtifacts":
        doc = json.loads(Path(path).read_text())
        smote = doc.get("smote")
        return cls(
            target_column=doc["target_column"],
            classes_kept=tuple(doc["classes_kept"]),
            label_encoding=LabelEncoding.from_dict(doc["label_encoding"]),
            encoder=CategoricalEncoder.from_dict(doc["categorical"]),
            scaler=MinMaxScaler.from_dict(doc["scaler"]),
            split=SplitIndices.from_dict(doc["split"]),
            smote=SmoteConfig(smote["k_neighbors"], smote["seed"]) if smote else None,
        )
