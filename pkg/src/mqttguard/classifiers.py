"""The four supervised models behind one sklearn-style contract.

Every classifier implements ``fit(X, y) -> self``, ``predict`` and
``predict_proba``. Labels are dense integer codes; ``predict`` is always the
per-row argmax of ``predict_proba`` with ties resolved to the lowest class
code. Fitting is deterministic given the constructor seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import (
    DimensionMismatchError,
    InvalidHyperparameterError,
    NotFittedError,
)
from .tree import (
    TreeNode,
    grow_classification_tree,
    grow_regression_tree,
    tree_apply_proba,
    tree_apply_value,
)


def _rng(*entropy: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy))


def check_fit_inputs(X, y) -> tuple[np.ndarray, np.ndarray, int]:
    """Validate a training pair; returns (X, codes, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatchError(f"X must be 2-D, got shape {X.shape}")
    if len(X) != len(y):
        raise DimensionMismatchError(f"{len(X)} rows vs {len(y)} labels")
    if len(X) == 0:
        raise DimensionMismatchError("cannot fit on zero rows")
    if not np.isfinite(X).all():
        raise DimensionMismatchError("X contains non-finite values")
    try:
        codes = y.astype(np.int64)
    except (TypeError, ValueError) as exc:
        raise InvalidHyperparameterError("labels must be integer class codes") from exc
    if not np.array_equal(codes, np.asarray(y)):
        raise InvalidHyperparameterError("labels must be integer class codes")
    if codes.min() < 0:
        raise InvalidHyperparameterError("class codes must be >= 0")
    return X, codes, int(codes.max()) + 1


def check_predict_input(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DimensionMismatchError(
            f"expected (*, {n_features}) input, got shape {X.shape}"
        )
    return X


class _ProbaClassifier(BaseEstimator, ClassifierMixin):
    """predict = argmax of predict_proba; first max wins, i.e. lowest code."""

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1).astype(np.int64)

    def _require_fitted(self) -> None:
        if not hasattr(self, "n_features_in_"):
            raise NotFittedError(f"{type(self).__name__} used before fit")


# --------------------------------------------------------------------------
# decision tree
# --------------------------------------------------------------------------

class DecisionTreeClassifier(_ProbaClassifier):
    """CART with Gini impurity and midpoint thresholds.

    Parameters
    ----------
    max_depth : int or None
        None grows until nodes are pure or inseparable.
    min_samples_split : int
        Smallest node that may still be split.
    min_impurity_decrease : float
        Required weighted Gini decrease for a split to be kept.
    """

    def __init__(self, max_depth: int | None = None, min_samples_split: int = 2,
                 min_impurity_decrease: float = 0.0):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_impurity_decrease = min_impurity_decrease

    def _validate_params(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise InvalidHyperparameterError(f"max_depth={self.max_depth} must be >= 1")
        if self.min_samples_split < 2:
            raise InvalidHyperparameterError("min_samples_split must be >= 2")
        if self.min_impurity_decrease < 0:
            raise InvalidHyperparameterError("min_impurity_decrease must be >= 0")

    def fit(self, X, y) -> "DecisionTreeClassifier":
        self._validate_params()
        X, codes, n_classes = check_fit_inputs(X, y)
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = n_classes
        self.tree_ = grow_classification_tree(
            X, codes, n_classes,
            max_depth=self.max_depth,
            min_samples_split=self.min_samples_split,
            min_impurity_decrease=self.min_impurity_decrease,
        )
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._require_fitted()
        X = check_predict_input(X, self.n_features_in_)
        return tree_apply_proba(self.tree_, X, self.n_classes_)


# --------------------------------------------------------------------------
# random forest
# --------------------------------------------------------------------------

class RandomForestClassifier(_ProbaClassifier):
    """Bootstrap ensemble of CART trees with per-split feature subsampling.

    Per-tree generators derive from (seed, tree index), so refits are
    bit-identical and trees could be grown in any order.
    ``predict_proba`` averages leaf frequencies over trees and ``predict``
    takes its argmax, which acts as the forest vote with lowest-code ties.
    """

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_split: int = 2, min_impurity_decrease: float = 0.0,
                 bootstrap: bool = True, max_features: int | str | None = "sqrt",
                 seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_impurity_decrease = min_impurity_decrease
        self.bootstrap = bootstrap
        self.max_features = max_features
        self.seed = seed

    def _resolve_max_features(self, d: int) -> int | None:
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return int(np.ceil(np.sqrt(d)))
        if isinstance(self.max_features, (int, np.integer)) and 1 <= self.max_features:
            return min(int(self.max_features), d)
        raise InvalidHyperparameterError(
            f"max_features must be None, 'sqrt' or a positive int, got {self.max_features!r}"
        )

    def fit(self, X, y) -> "RandomForestClassifier":
        if self.n_trees < 1:
            raise InvalidHyperparameterError("n_trees must be >= 1")
        X, codes, n_classes = check_fit_inputs(X, y)
        n, d = X.shape
        mtry = self._resolve_max_features(d)
        self.n_features_in_ = d
        self.n_classes_ = n_classes
        self.trees_ = []
        for t in range(self.n_trees):
            rng = _rng(self.seed, t)
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            self.trees_.append(
                grow_classification_tree(
                    X[idx], codes[idx], n_classes,
                    max_depth=self.max_depth,
                    min_samples_split=self.min_samples_split,
                    min_impurity_decrease=self.min_impurity_decrease,
                    max_features=mtry,
                    rng=rng,
                )
            )
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._require_fitted()
        X = check_predict_input(X, self.n_features_in_)
        out = np.zeros((X.shape[0], self.n_classes_))
        for tree in self.trees_:
            out += tree_apply_proba(tree, X, self.n_classes_)
        return out / len(self.trees_)


# --------------------------------------------------------------------------
# k-nearest neighbors
# --------------------------------------------------------------------------

class KNeighborsClassifier(_ProbaClassifier):
    """Brute-force Euclidean k-NN over the stored training matrix.

    Distance ties prefer the lower training-row index; vote ties resolve
    to the lowest class code via the shared argmax rule.
    """

    def __init__(self, k: int = 5):
        self.k = k

    def fit(self, X, y) -> "KNeighborsClassifier":
        X, codes, n_classes = check_fit_inputs(X, y)
        if not 1 <= self.k <= len(X):
            raise InvalidHyperparameterError(
                f"k={self.k} outside [1, n_train={len(X)}]"
            )
        self.X_ = X
        self.y_ = codes
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = n_classes
        self._train_sq = np.einsum("ij,ij->i", X, X)
        return self

    def predict_proba(self, X) -> np.ndarray:
        self._require_fitted()
        X = check_predict_input(X, self.n_features_in_)
        n = X.shape[0]
        out = np.empty((n, self.n_classes_))
        block = max(1, min(n, 4_000_000 // max(len(self.X_), 1)))
        for start in range(0, n, block):
            stop = min(start + block, n)
            q = X[start:stop]
            d2 = (
                np.einsum("ij,ij->i", q, q)[:, None]
                + self._train_sq[None, :]
                - 2.0 * (q @ self.X_.T)
            )
            # stable sort: equal distances keep ascending train-row order
            nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            votes = self.y_[nearest]
            counts = np.zeros((stop - start, self.n_classes_))
            for c in range(self.n_classes_):
                counts[:, c] = (votes == c).sum(axis=1)
            out[start:stop] = counts / self.k
        return out


# --------------------------------------------------------------------------
# gradient-boosted trees
# --------------------------------------------------------------------------

def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def multiclass_log_loss(proba: np.ndarray, y: np.ndarray) -> float:
    eps = 1e-15
    picked = np.clip(proba[np.arange(len(y)), y], eps, 1.0)
    return float(-np.log(picked).mean())


class GradientBoostedTreesClassifier(_ProbaClassifier):
    """Newton-boosted regression trees on the softmax cross-entropy.

    Each round fits one regression tree per class to the gradient
    g = p - 1[y == c] and hessian h = p (1 - p), with leaf weights
    -G / (H + reg_lambda) scaled by the learning rate. Scores start at
    zero for every class. ``train_loss_curve_`` records the training
    cross-entropy after each round.
    """

    def __init__(self, n_rounds: int = 100, learning_rate: float = 0.1,
                 max_depth: int = 6, reg_lambda: float = 1.0,
                 min_samples_split: int = 2):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.min_samples_split = min_samples_split

    def _validate_params(self) -> None:
        if self.n_rounds < 1:
            raise InvalidHyperparameterError("n_rounds must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvalidHyperparameterError("learning_rate must be in (0, 1]")
        if self.max_depth < 1:
            raise InvalidHyperparameterError("max_depth must be >= 1")
        if self.reg_lambda < 0.0:
            raise InvalidHyperparameterError("reg_lambda must be >= 0")

    def fit(self, X, y) -> "GradientBoostedTreesClassifier":
        self._validate_params()
        X, codes, n_classes = check_fit_inputs(X, y)
        n = X.shape[0]
        self.n_features_in_ = X.shape[1]
        self.n_classes_ = n_classes
        self.init_scores_ = np.zeros(n_classes)
        self.trees_: list[list[TreeNode]] = []
        self.train_loss_curve_: list[float] = []

        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), codes] = 1.0
        scores = np.tile(self.init_scores_, (n, 1))
        for _ in range(self.n_rounds):
            proba = softmax(scores)
            round_trees = []
            for c in range(n_classes):
                g = proba[:, c] - onehot[:, c]
                # floor keeps leaf weights finite when reg_lambda == 0
                h = np.maximum(proba[:, c] * (1.0 - proba[:, c]), 1e-16)
                tree = grow_regression_tree(
                    X, g, h,
                    max_depth=self.max_depth,
                    reg_lambda=self.reg_lambda,
                    min_samples_split=self.min_samples_split,
                )
                scores[:, c] += self.learning_rate * tree_apply_value(tree, X)
                round_trees.append(tree)
            self.trees_.append(round_trees)
            self.train_loss_curve_.append(multiclass_log_loss(softmax(scores), codes))
        return self

    def decision_scores(self, X) -> np.ndarray:
        self._require_fitted()
        X = check_predict_input(X, self.n_features_in_)
        scores = np.tile(self.init_scores_, (X.shape[0], 1))
        for round_trees in self.trees_:
            for c, tree in enumerate(round_trees):
                scores[:, c] += self.learning_rate * tree_apply_value(tree, X)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_scores(X))


# --------------------------------------------------------------------------
# spec-driven construction
# --------------------------------------------------------------------------

BASE_KINDS = ("decision_tree", "random_forest", "knn", "gbt")


@dataclass(frozen=True)
class ClassifierSpec:
    """Declarative (kind, hyperparameters, seed) bundle for config files."""

    kind: str
    hyperparameters: Mapping = field(default_factory=dict)
    seed: int = 0


def build_base_classifier(spec: ClassifierSpec):
    """Instantiate one of the four base classifiers from a spec."""
    params = dict(spec.hyperparameters)
    try:
        if spec.kind == "decision_tree":
            return DecisionTreeClassifier(**params)
        if spec.kind == "random_forest":
            params.setdefault("seed", spec.seed)
            return RandomForestClassifier(**params)
        if spec.kind == "knn":
            return KNeighborsClassifier(**params)
        if spec.kind == "gbt":
            return GradientBoostedTreesClassifier(**params)
    except TypeError as exc:
        raise InvalidHyperparameterError(f"{spec.kind}: {exc}") from exc
    raise InvalidHyperparameterError(f"unknown classifier kind {spec.kind!r}")
