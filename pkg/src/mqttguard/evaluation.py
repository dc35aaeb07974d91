"""Confusion-matrix metrics, evaluation reports and cross-validation.

Multiclass precision/recall/F1 are read one-vs-rest from the confusion
matrix. Zero denominators yield 0 rather than NaN so reports are always
total. Report renderers mirror the per-class table layout used throughout
the toolkit: Methods / Attack / Precision / Recall / F1-Score / Accuracy /
Training time / Test time.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.base import clone

from .dataset import Dataset
from .errors import (
    CodeOutOfRangeError,
    EmptyMatrixError,
    FoldTooSmallError,
    LengthMismatchError,
)
from .preprocess import MinMaxScaler, SmoteConfig, SmoteOversampler, stratified_fold_ids


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts[t][p] = rows with true class t predicted as p."""

    counts: np.ndarray
    label_names: tuple[str, ...] | None = None

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "label_names": list(self.label_names) if self.label_names else None,
        }


def confusion(
    y_true: np.ndarray,
    y_pred: np.ndarray,
    n_classes: int,
    label_names: Sequence[str] | None = None,
) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise LengthMismatchError(f"{len(y_true)} true vs {len(y_pred)} predicted")
    for name, vec in (("true", y_true), ("predicted", y_pred)):
        if len(vec) and (vec.min() < 0 or vec.max() >= n_classes):
            raise CodeOutOfRangeError(f"{name} codes outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts=counts, label_names=tuple(label_names) if label_names else None)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrixError("accuracy undefined on an empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


def class_metrics(cm: ConfusionMatrix, c: int) -> ClassMetrics:
    """One-vs-rest metrics for class c; zero denominators give 0."""
    if not 0 <= c < cm.n_classes:
        raise CodeOutOfRangeError(f"class code {c} outside [0, {cm.n_classes})")
    tp = float(cm.counts[c, c])
    fp = float(cm.counts[:, c].sum()) - tp
    fn = float(cm.counts[c, :].sum()) - tp
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ClassMetrics(precision=precision, recall=recall, f1=f1, support=int(tp + fn))


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    per_class: tuple[ClassMetrics, ...]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    fit_time_s: float = 0.0
    predict_time_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "per_class": [m.to_dict() for m in self.per_class],
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "fit_time_s": self.fit_time_s,
            "predict_time_s": self.predict_time_s,
        }


def report_from_confusion(
    cm: ConfusionMatrix, fit_time_s: float = 0.0, predict_time_s: float = 0.0
) -> EvalReport:
    per_class = tuple(class_metrics(cm, c) for c in range(cm.n_classes))
    supports = np.array([m.support for m in per_class], dtype=np.float64)
    weights = supports / supports.sum() if supports.sum() > 0 else np.zeros_like(supports)

    def macro(attr: str) -> float:
        return float(np.mean([getattr(m, attr) for m in per_class]))

    def weighted(attr: str) -> float:
        return float(np.sum(weights * [getattr(m, attr) for m in per_class]))

    return EvalReport(
        confusion=cm,
        per_class=per_class,
        accuracy=accuracy(cm),
        macro_precision=macro("precision"),
        macro_recall=macro("recall"),
        macro_f1=macro("f1"),
        weighted_precision=weighted("precision"),
        weighted_recall=weighted("recall"),
        weighted_f1=weighted("f1"),
        fit_time_s=fit_time_s,
        predict_time_s=predict_time_s,
    )


def evaluate(model, test: Dataset | tuple, fit_time_s: float = 0.0) -> EvalReport:
    """Score a fitted model on held-out data; predict is wall-clock timed."""
    if isinstance(test, Dataset):
        X, y = test.matrix(), test.labels
        names = test.label_names
    else:
        X, y = test
        names = None
    start = time.perf_counter()
    y_pred = model.predict(X)
    predict_time = time.perf_counter() - start
    n_classes = getattr(model, "n_classes_", int(max(np.max(y), np.max(y_pred))) + 1)
    cm = confusion(y, y_pred, n_classes, label_names=names)
    return report_from_confusion(cm, fit_time_s=fit_time_s, predict_time_s=predict_time)


# --------------------------------------------------------------------------
# cross-validation
# --------------------------------------------------------------------------

CV_METRICS = (
    "accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "weighted_precision",
    "weighted_recall",
    "weighted_f1",
    "fit_time_s",
    "predict_time_s",
)


@dataclass
class CvReport:
    folds: int
    reports: tuple[EvalReport, ...]
    mean: dict[str, float]
    std: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "folds": self.folds,
            "reports": [r.to_dict() for r in self.reports],
            "mean": self.mean,
            "std": self.std,
        }


def cross_validate(
    prototype,
    ds: Dataset,
    folds: int,
    seed: int,
    smote: SmoteConfig | None = None,
    scale: bool = True,
) -> CvReport:
    """Stratified k-fold evaluation with leakage-safe preprocessing.

    Per fold: the scaler is fitted on the training folds only, both sides
    are scaled, SMOTE (if configured) balances the training side only,
    a fresh clone of ``prototype`` is fitted and scored on the held-out
    fold.
    """
    if folds < 2:
        raise FoldTooSmallError("cross-validation needs folds >= 2")
    X, y = ds.matrix(), np.asarray(ds.labels, dtype=np.int64)
    fold_ids = stratified_fold_ids(y, folds, seed)
    reports = []
    for f in range(folds):
        test_mask = fold_ids == f
        X_train, y_train = X[~test_mask], y[~test_mask]
        X_test, y_test = X[test_mask], y[test_mask]
        if scale:
            scaler = MinMaxScaler().fit(X_train)
            X_train = scaler.transform(X_train)
            X_test = scaler.transform(X_test)
        if smote is not None:
            X_train, y_train = SmoteOversampler(
                smote.k_neighbors, smote.seed
            ).fit_resample(X_train, y_train)
        model = clone(prototype)
        start = time.perf_counter()
        model.fit(X_train, y_train)
        fit_time = time.perf_counter() - start
        report = evaluate(model, (X_test, y_test), fit_time_s=fit_time)
        if ds.label_names is not None:
            report.confusion = ConfusionMatrix(
                counts=report.confusion.counts, label_names=ds.label_names
            )
        reports.append(report)

    mean = {m: float(np.mean([getattr(r, m) for r in reports])) for m in CV_METRICS}
    std = {m: float(np.std([getattr(r, m) for r in reports])) for m in CV_METRICS}
    return CvReport(folds=folds, reports=tuple(reports), mean=mean, std=std)


# --------------------------------------------------------------------------
# markdown rendering
# --------------------------------------------------------------------------

_TABLE_HEADER = (
    "| Methods | Attack | Precision | Recall | F1-Score | Accuracy "
    "| Training time | Test time |\n"
    "|---|---|---|---|---|---|---|---|\n"
)


def _class_display(names: tuple[str, ...] | None, code: int) -> str:
    if names and code < len(names):
        return f"{names[code].capitalize()}: {code}"
    return f"Class: {code}"


def render_report_markdown(method: str, report: EvalReport) -> str:
    """Per-class markdown rows in the standard evaluation layout."""
    lines = [_TABLE_HEADER.rstrip("\n")]
    names = report.confusion.label_names
    for code, m in enumerate(report.per_class):
        first = code == 0
        lines.append(
            "| {method} | {attack} | {p:.2f} | {r:.2f} | {f:.2f} | {acc} | {fit} | {pred} |".format(
                method=method if first else "",
                attack=_class_display(names, code),
                p=m.precision,
                r=m.recall,
                f=m.f1,
                acc=f"{report.accuracy:.4f}" if first else "",
                fit=f"{report.fit_time_s:.4f}" if first else "",
                pred=f"{report.predict_time_s:.4f}" if first else "",
            )
        )
    return "\n".join(lines) + "\n"


def render_comparison_markdown(rows: Sequence[tuple[str, Mapping[str, float]]]) -> str:
    """Single method-per-row table sorted by accuracy, best first.

    Each entry is (method name, metrics mapping with at least "accuracy");
    missing timing keys render as 0.
    """
    ordered = sorted(rows, key=lambda item: -item[1].get("accuracy", 0.0))
    lines = [
        "| Method | Accuracy | Macro F1 | Training time | Test time |",
        "|---|---|---|---|---|",
    ]
    for name, metrics in ordered:
        lines.append(
            "| {name} | {acc:.4f} | {f1:.4f} | {fit:.4f} | {pred:.4f} |".format(
                name=name,
                acc=metrics.get("accuracy", 0.0),
                f1=metrics.get("macro_f1", 0.0),
                fit=metrics.get("fit_time_s", 0.0),
                pred=metrics.get("predict_time_s", 0.0),
            )
        )
    return "\n".join(lines) + "\n"
