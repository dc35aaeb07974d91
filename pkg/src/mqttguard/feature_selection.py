"""Feature ranking and selection.

Three rankers score features against the class labels: a one-way ANOVA
F-statistic ("kbest"), the absolute Pearson correlation with the integer
class codes ("pcc"), and a variance-weighted principal-component loading
score ("pca"). A consensus reducer merges ranked lists; the shipped default
pipeline instead uses the fixed golden ten-feature set so results stay
comparable across runs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._linalg import eigh_descending
from .dataset import ColumnSchema, Dataset
from .errors import (
    InsufficientFeaturesError,
    MissingColumnError,
    NotFittedError,
    RankDeficientError,
    SingleClassError,
)

GOLDEN_FEATURES: tuple[str, ...] = (
    "tcp.flags",
    "tcp.time_delta",
    "tcp.len",
    "mqtt.dupflag",
    "mqtt.hdrflags",
    "mqtt.len",
    "mqtt.msg",
    "mqtt.msgid",
    "mqtt.qos",
    "mqtt.conack.flags",
)


@dataclass(frozen=True)
class RankedFeatures:
    """Ordered (name, score) pairs for one ranking method, best first."""

    method: str
    entries: tuple[tuple[str, float], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def to_list(self) -> list:
        return [[name, "inf" if math.isinf(score) else score] for name, score in self.entries]

    @classmethod
    def from_list(cls, method: str, entries: Sequence) -> "RankedFeatures":
        parsed = tuple(
            (str(name), math.inf if score == "inf" else float(score))
            for name, score in entries
        )
        return cls(method=method, entries=parsed)


@dataclass(frozen=True)
class FeatureSet:
    names: tuple[str, ...]
    provenance: str  # "golden" | "consensus" | "manual"

    def __post_init__(self) -> None:
        if not self.names:
            raise InsufficientFeaturesError("feature set cannot be empty")
        if len(set(self.names)) != len(self.names):
            raise InsufficientFeaturesError("feature set contains duplicates")


def _named(feature_names: Sequence[str] | None, d: int) -> list[str]:
    if feature_names is None:
        return [f"f{i}" for i in range(d)]
    if len(feature_names) != d:
        raise MissingColumnError(
            f"{len(feature_names)} feature names for {d} columns"
        )
    return [str(n) for n in feature_names]


def _ranked(method: str, names: Sequence[str], scores: np.ndarray, k: int) -> RankedFeatures:
    # stable sort keeps schema position order among tied scores
    order = np.argsort(-scores, kind="stable")[:k]
    entries = tuple((names[i], float(scores[i])) for i in order)
    return RankedFeatures(method=method, entries=entries)


# --------------------------------------------------------------------------
# rankers
# --------------------------------------------------------------------------

def kbest_rank(
    X: np.ndarray,
    y: np.ndarray,
    k: int,
    feature_names: Sequence[str] | None = None,
) -> RankedFeatures:
    """Top-k features by one-way ANOVA F-statistic.

    A feature that is constant within every class but differs between
    classes has zero within-class variance; it scores +inf and ranks
    first. A feature constant everywhere scores 0.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    names = _named(feature_names, d)
    if k > d:
        raise InsufficientFeaturesError(f"k={k} exceeds {d} features")
    classes = np.unique(y)
    g = len(classes)
    if g < 2:
        raise SingleClassError("ANOVA needs at least two classes")

    grand = X.mean(axis=0)
    ss_between = np.zeros(d)
    ss_within = np.zeros(d)
    for cls in classes:
        Xc = X[y == cls]
        mc = Xc.mean(axis=0)
        ss_between += len(Xc) * (mc - grand) ** 2
        ss_within += ((Xc - mc) ** 2).sum(axis=0)

    ms_between = ss_between / (g - 1)
    ms_within = ss_within / max(n - g, 1)
    scores = np.zeros(d)
    zero_within = ss_within == 0.0
    regular = ~zero_within
    scores[regular] = ms_between[regular] / ms_within[regular]
    scores[zero_within & (ss_between > 0.0)] = np.inf
    return _ranked("kbest", names, scores, k)


def pearson_rank(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str] | None = None,
) -> RankedFeatures:
    """All features ranked by |Pearson r| against the integer class codes.

    Constant columns (or a constant label vector) score 0 rather than
    dividing by a zero standard deviation.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    names = _named(feature_names, d)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt((xc**2).sum(axis=0))
    sy = np.sqrt((yc**2).sum())
    scores = np.zeros(d)
    ok = (sx > 0.0) & (sy > 0.0)
    if ok.any():
        scores[ok] = np.abs(xc[:, ok].T @ yc) / (sx[ok] * sy)
    return _ranked("pcc", names, scores, d)


class PrincipalComponents(BaseEstimator, TransformerMixin):
    """PCA over the sample covariance matrix.

    Fitted attributes: ``components_`` (rows are principal directions,
    descending variance, sign-normalized so each row's largest-magnitude
    entry is positive), ``explained_variance_ratio_`` and ``mean_``.
    """

    def __init__(self, n_components: int | None = None):
        self.n_components = n_components

    def fit(self, X, y=None) -> "PrincipalComponents":
        X = np.asarray(X, dtype=np.float64)
        n, d = X.shape
        c = self.n_components if self.n_components is not None else min(n, d)
        if not 1 <= c <= min(n, d):
            raise InsufficientFeaturesError(
                f"n_components={c} outside [1, min(n={n}, d={d})]"
            )
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = (centered.T @ centered) / max(n - 1, 1)
        total = float(np.trace(cov))
        if total == 0.0:
            raise RankDeficientError("total variance is exactly zero")
        values, vectors = eigh_descending(cov)
        values = np.clip(values, 0.0, None)
        comps = vectors[:, :c].T.copy()
        for row in comps:
            lead = np.argmax(np.abs(row))
            if row[lead] < 0:
                row *= -1.0
        self.components_ = comps
        self.explained_variance_ = values[:c]
        self.explained_variance_ratio_ = values[:c] / total
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("PrincipalComponents.transform before fit")
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean_) @ self.components_.T


def pca_fit(X: np.ndarray, n_components: int) -> PrincipalComponents:
    return PrincipalComponents(n_components=n_components).fit(X)


def pca_rank(
    X: np.ndarray,
    k: int,
    feature_names: Sequence[str] | None = None,
    variance_cutoff: float = 0.95,
) -> RankedFeatures:
    """Top-k original features by variance-weighted component loadings.

    Importance of a feature is the sum of ``ratio_c * |loading|`` over the
    leading components whose cumulative explained-variance ratio stays
    within ``variance_cutoff`` (always at least one component).
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    names = _named(feature_names, d)
    if k > d:
        raise InsufficientFeaturesError(f"k={k} exceeds {d} features")
    model = PrincipalComponents(n_components=min(n, d)).fit(X)
    ratios = model.explained_variance_ratio_
    cum = np.cumsum(ratios)
    n_use = max(1, int(np.sum(cum <= variance_cutoff)))
    weights = ratios[:n_use]
    loadings = np.abs(model.components_[:n_use])
    scores = weights @ loadings
    return _ranked("pca", names, scores, k)


# --------------------------------------------------------------------------
# reduction to a final set
# --------------------------------------------------------------------------

def consensus_select(
    reports: Sequence[RankedFeatures],
    n: int,
    top_per_method: int = 10,
) -> FeatureSet:
    """Merge per-method rankings into one feature set.

    Each method contributes its top ``top_per_method`` names; candidates
    are ordered by how many methods list them, then by mean rank within
    those lists, then by name.
    """
    if len(reports) < 2:
        raise InsufficientFeaturesError("consensus needs at least two rankings")
    appearances: dict[str, list[int]] = {}
    for report in reports:
        for rank, name in enumerate(report.names[:top_per_method], start=1):
            appearances.setdefault(name, []).append(rank)
    if len(appearances) < n:
        raise InsufficientFeaturesError(
            f"only {len(appearances)} distinct names across rankings, need {n}"
        )
    ordered = sorted(
        appearances.items(),
        key=lambda item: (-len(item[1]), sum(item[1]) / len(item[1]), item[0]),
    )
    return FeatureSet(names=tuple(name for name, _ in ordered[:n]), provenance="consensus")


def golden_final_set() -> FeatureSet:
    """The fixed ten-feature set the default pipeline projects onto."""
    return FeatureSet(names=GOLDEN_FEATURES, provenance="golden")


def project(ds: Dataset, fs: FeatureSet) -> Dataset:
    """Restrict a Dataset to the feature set's columns, in set order."""
    missing = [nm for nm in fs.names if nm not in ds.feature_names]
    if missing:
        raise MissingColumnError(f"feature set names absent from schema: {missing}")
    schema = tuple(
        ColumnSchema(nm, ds.column_kind(nm), i) for i, nm in enumerate(fs.names)
    )
    frame = ds.frame[list(fs.names)].copy()
    return replace(ds, frame=frame, schema=schema)


# --------------------------------------------------------------------------
# report document
# --------------------------------------------------------------------------

@dataclass
class SelectionReport:
    rankings: tuple[RankedFeatures, ...]
    selected: FeatureSet

    def to_json(self, path: str | Path) -> None:
        doc = {
            "methods": {r.method: r.to_list() for r in self.rankings},
            "selected": {"names": list(self.selected.names), "provenance": self.selected.provenance},
        }
        Path(path).write_text(json.dumps(doc, indent=2))

    @classmethod
    def from_json(cls, path: str | Path) -> "SelectionReport":
        doc = json.loads(Path(path).read_text())
        rankings = tuple(
            RankedFeatures.from_list(method, entries)
            for method, entries in doc["methods"].items()
        )
        sel = doc["selected"]
        return cls(rankings=rankings, selected=FeatureSet(tuple(sel["names"]), sel["provenance"]))
