"""Stacking, hard voting and bagging over the base classifiers.

Stacking trains its meta-learner on out-of-fold class probabilities so no
base model ever scores a row it was trained on. Voting and bagging predict
by modal class with ties resolved to the lowest code; their
``predict_proba`` is the vote-fraction matrix, so argmax-of-proba and the
vote rule agree exactly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone

from .classifiers import (
    ClassifierSpec,
    DecisionTreeClassifier,
    GradientBoostedTreesClassifier,
    KNeighborsClassifier,
    RandomForestClassifier,
    build_base_classifier,
    check_fit_inputs,
    check_predict_input,
)
from .errors import (
    FoldTooSmallError,
    InvalidHyperparameterError,
    NotFittedError,
)
from .preprocess import stratified_fold_ids


def default_base_estimators(seed: int = 0) -> list[tuple[str, object]]:
    """The standard four-member lineup, in fixed layout order."""
    return [
        ("random_forest", RandomForestClassifier(seed=seed)),
        ("decision_tree", DecisionTreeClassifier()),
        ("knn", KNeighborsClassifier()),
        ("gbt", GradientBoostedTreesClassifier()),
    ]


def build_model(kind: str, hyperparameters=None, seed: int = 0):
    """Instantiate any of the seven model kinds from config-style arguments."""
    params = dict(hyperparameters or {})
    try:
        if kind == "stacking":
            params.setdefault("seed", seed)
            return StackingClassifier(**params)
        if kind == "voting":
            params.setdefault("seed", seed)
            return VotingClassifier(**params)
        if kind == "bagging":
            params.setdefault("seed", seed)
            return BaggingClassifier(**params)
    except TypeError as exc:
        raise InvalidHyperparameterError(f"{kind}: {exc}") from exc
    return build_base_classifier(ClassifierSpec(kind=kind, hyperparameters=params, seed=seed))


def _vote_fractions(votes: np.ndarray, n_classes: int) -> np.ndarray:
    """Rows of per-class vote shares from an (n, members) vote matrix."""
    counts = np.zeros((votes.shape[0], n_classes))
    for c in range(n_classes):
        counts[:, c] = (votes == c).sum(axis=1)
    return counts / votes.shape[1]


class StackingClassifier(BaseEstimator, ClassifierMixin):
    """Two-stage ensemble: four base learners and a forest meta-learner.

    Stage one builds an out-of-fold meta-feature matrix: the training rows
    are split into stratified folds and each base model, fitted on the
    complement of a fold, contributes predicted class probabilities for
    that fold. Every row is covered exactly once. Stage two fits the
    meta-learner on those features, then the bases are refitted on the full
    training set for prediction time.
    """

    def __init__(self, estimators=None, final_estimator=None, n_folds: int = 5,
                 seed: int = 0):
        self.estimators = estimators
        self.final_estimator = final_estimator
        self.n_folds = n_folds
        self.seed = seed

    def _members(self) -> list[tuple[str, object]]:
        members = self.estimators if self.estimators is not None else default_base_estimators(self.seed)
        if len(members) < 2:
            raise InvalidHyperparameterError("stacking needs at least two base estimators")
        return members

    def fit(self, X, y) -> "StackingClassifier":
        if self.n_folds < 2:
            raise FoldTooSmallError("stacking needs n_folds >= 2")
        X, codes, n_classes = check_fit_inputs(X, y)
        members = self._members()
        meta = self.final_estimator if self.final_estimator is not None else RandomForestClassifier(seed=self.seed)

        fold_ids = stratified_fold_ids(codes, self.n_folds, self.seed)
        n = len(codes)
        oof = np.zeros((n, len(members) * n_classes))
        for f in range(self.n_folds):
            test_mask = fold_ids == f
            train_idx = np.flatnonzero(~test_mask)
            test_idx = np.flatnonzero(test_mask)
            for m, (_, proto) in enumerate(members):
                model = clone(proto).fit(X[train_idx], codes[train_idx])
                cols = slice(m * n_classes, (m + 1) * n_classes)
                oof[test_idx, cols] = model.predict_proba(X[test_idx])

        self.meta_model_ = clone(meta).fit(oof, codes)
        self.base_models_ = [(name, clone(proto).fit(X, codes)) for name, proto in members]
        self.oof_features_ = oof
        self.fold_ids_ = fold_ids
        self.n_classes_ = n_classes
        self.n_features_in_ = X.shape[1]
        self.meta_feature_layout_ = tuple(
            (name, n_classes) for name, _ in self.base_models_
        )
        return self

    def _meta_features(self, X) -> np.ndarray:
        if not hasattr(self, "meta_model_"):
            raise NotFittedError("StackingClassifier used before fit")
        X = check_predict_input(X, self.n_features_in_)
        return np.hstack([model.predict_proba(X) for _, model in self.base_models_])

    def predict(self, X) -> np.ndarray:
        return self.meta_model_.predict(self._meta_features(X))

    def predict_proba(self, X) -> np.ndarray:
        return self.meta_model_.predict_proba(self._meta_features(X))


class VotingClassifier(BaseEstimator, ClassifierMixin):
    """Hard majority vote over independently fitted members.

    The modal class wins; 2-2 and other exact ties go to the lowest class
    code. ``predict_proba`` returns vote fractions.
    """

    def __init__(self, estimators=None, seed: int = 0):
        self.estimators = estimators
        self.seed = seed

    def fit(self, X, y) -> "VotingClassifier":
        members = self.estimators if self.estimators is not None else default_base_estimators(self.seed)
        if len(members) < 2:
            raise InvalidHyperparameterError("voting needs at least two estimators")
        X, codes, n_classes = check_fit_inputs(X, y)
        self.models_ = [(name, clone(proto).fit(X, codes)) for name, proto in members]
        self.n_classes_ = n_classes
        self.n_features_in_ = X.shape[1]
        return self

    def _votes(self, X) -> np.ndarray:
        if not hasattr(self, "models_"):
            raise NotFittedError("VotingClassifier used before fit")
        X = check_predict_input(X, self.n_features_in_)
        return np.column_stack([model.predict(X) for _, model in self.models_])

    def predict_proba(self, X) -> np.ndarray:
        return _vote_fractions(self._votes(X), self.n_classes_)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1).astype(np.int64)


class BaggingClassifier(BaseEstimator, ClassifierMixin):
    """Bootstrap bags of one base model, aggregated by majority vote.

    Bag b trains on a seeded bootstrap resample of size n drawn from
    (seed, b); ``bootstrap=False`` is a test hook that feeds every bag the
    identity sample, making a single bag equal its base model.
    """

    def __init__(self, base_estimator=None, n_bags: int = 10, seed: int = 0,
                 bootstrap: bool = True):
        self.base_estimator = base_estimator
        self.n_bags = n_bags
        self.seed = seed
        self.bootstrap = bootstrap

    def fit(self, X, y) -> "BaggingClassifier":
        if self.n_bags < 1:
            raise InvalidHyperparameterError("n_bags must be >= 1")
        X, codes, n_classes = check_fit_inputs(X, y)
        base = self.base_estimator if self.base_estimator is not None else RandomForestClassifier(seed=self.seed)
        n = len(codes)
        self.bags_ = []
        for b in range(self.n_bags):
            if self.bootstrap:
                rng = np.random.default_rng(np.random.SeedSequence((self.seed, b)))
                idx = rng.integers(0, n, size=n)
            else:
                idx = np.arange(n)
            self.bags_.append(clone(base).fit(X[idx], codes[idx]))
        self.n_classes_ = n_classes
        self.n_features_in_ = X.shape[1]
        return self

    def _votes(self, X) -> np.ndarray:
        if not hasattr(self, "bags_"):
            raise NotFittedError("BaggingClassifier used before fit")
        X = check_predict_input(X, self.n_features_in_)
        return np.column_stack([bag.predict(X) for bag in self.bags_])

    def predict_proba(self, X) -> np.ndarray:
        return _vote_fractions(self._votes(X), self.n_classes_)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1).astype(np.int64)
