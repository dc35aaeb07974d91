"""JSON persistence for fitted models.

Documents follow one envelope: ``{version, kind, hyperparameters,
n_classes, feature_names, payload}`` with a kind-specific payload (tree
nodes as nested objects, k-NN as embedded matrices, ensembles as nested
member documents). Floats survive the round trip exactly, so a reloaded
model predicts bit-identically.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

import numpy as np

from .classifiers import (
    DecisionTreeClassifier,
    GradientBoostedTreesClassifier,
    KNeighborsClassifier,
    RandomForestClassifier,
)
from .ensembles import BaggingClassifier, StackingClassifier, VotingClassifier
from .errors import MalformedDocumentError, VersionMismatchError
from .tree import TreeNode

FORMAT_VERSION = 1

_CLASSES = {
    "decision_tree": DecisionTreeClassifier,
    "random_forest": RandomForestClassifier,
    "knn": KNeighborsClassifier,
    "gbt": GradientBoostedTreesClassifier,
    "stacking": StackingClassifier,
    "voting": VotingClassifier,
    "bagging": BaggingClassifier,
}
_KIND_BY_CLASS = {cls: kind for kind, cls in _CLASSES.items()}


def model_kind(model) -> str:
    """The registry kind string for a model instance."""
    kind = _KIND_BY_CLASS.get(type(model))
    if kind is None:
        raise MalformedDocumentError(f"unknown model type {type(model).__name__}")
    return kind


def _plain_params(model) -> dict:
    """Constructor params that are JSON scalars; estimator-valued ones live in payload."""
    out = {}
    for key, value in model.get_params(deep=False).items():
        if isinstance(value, (str, int, float, bool)) or value is None:
            out[key] = value
    return out


def _payload(model) -> dict:
    width = {"n_features": int(model.n_features_in_)}
    if isinstance(model, DecisionTreeClassifier):
        return {**width, "tree": model.tree_.to_dict()}
    if isinstance(model, RandomForestClassifier):
        return {**width, "trees": [t.to_dict() for t in model.trees_]}
    if isinstance(model, KNeighborsClassifier):
        return {**width, "X": model.X_.tolist(), "y": model.y_.tolist()}
    if isinstance(model, GradientBoostedTreesClassifier):
        return {
            **width,
            "init_scores": model.init_scores_.tolist(),
            "rounds": [[t.to_dict() for t in round_trees] for round_trees in model.trees_],
            "train_loss_curve": list(model.train_loss_curve_),
        }
    if isinstance(model, StackingClassifier):
        return {
            **width,
            "bases": [[name, model_to_doc(m)] for name, m in model.base_models_],
            "meta": model_to_doc(model.meta_model_),
            "layout": [[name, int(w)] for name, w in model.meta_feature_layout_],
        }
    if isinstance(model, VotingClassifier):
        return {**width, "members": [[name, model_to_doc(m)] for name, m in model.models_]}
    if isinstance(model, BaggingClassifier):
        return {**width, "bags": [model_to_doc(bag) for bag in model.bags_]}
    raise MalformedDocumentError(f"cannot serialize model type {type(model).__name__}")


def model_to_doc(model, feature_names=None) -> dict:
    kind = _KIND_BY_CLASS.get(type(model))
    if kind is None:
        raise MalformedDocumentError(f"unknown model type {type(model).__name__}")
    names = feature_names if feature_names is not None else getattr(model, "feature_names_in_", None)
    return {
        "version": FORMAT_VERSION,
        "kind": kind,
        "hyperparameters": _plain_params(model),
        "n_classes": int(model.n_classes_),
        "feature_names": list(names) if names is not None else None,
        "payload": _payload(model),
    }


def _restore(model, kind: str, payload: Mapping, doc: Mapping) -> None:
    model.n_classes_ = int(doc["n_classes"])
    model.n_features_in_ = int(payload["n_features"])
    if kind == "decision_tree":
        model.tree_ = TreeNode.from_dict(payload["tree"])
    elif kind == "random_forest":
        model.trees_ = [TreeNode.from_dict(t) for t in payload["trees"]]
    elif kind == "knn":
        model.X_ = np.asarray(payload["X"], dtype=np.float64)
        model.y_ = np.asarray(payload["y"], dtype=np.int64)
        model._train_sq = np.einsum("ij,ij->i", model.X_, model.X_)
    elif kind == "gbt":
        model.init_scores_ = np.asarray(payload["init_scores"], dtype=np.float64)
        model.trees_ = [
            [TreeNode.from_dict(t) for t in round_trees]
            for round_trees in payload["rounds"]
        ]
        model.train_loss_curve_ = [float(v) for v in payload.get("train_loss_curve", [])]
    elif kind == "stacking":
        model.base_models_ = [(name, model_from_doc(d)) for name, d in payload["bases"]]
        model.meta_model_ = model_from_doc(payload["meta"])
        model.meta_feature_layout_ = tuple((name, int(w)) for name, w in payload["layout"])
    elif kind == "voting":
        model.models_ = [(name, model_from_doc(d)) for name, d in payload["members"]]
    elif kind == "bagging":
        model.bags_ = [model_from_doc(d) for d in payload["bags"]]


def model_from_doc(doc: Mapping):
    if not isinstance(doc, Mapping) or not doc:
        raise MalformedDocumentError("empty or non-object model document")
    missing = {"version", "kind", "hyperparameters", "n_classes", "payload"} - set(doc)
    if missing:
        raise MalformedDocumentError(f"model document missing keys: {sorted(missing)}")
    if doc["version"] != FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported model format version {doc['version']!r}, expected {FORMAT_VERSION}"
        )
    kind = doc["kind"]
    cls = _CLASSES.get(kind)
    if cls is None:
        raise MalformedDocumentError(f"unknown model kind {kind!r}")
    try:
        model = cls(**doc["hyperparameters"])
    except TypeError as exc:
        raise MalformedDocumentError(f"bad hyperparameters for {kind}: {exc}") from exc
    try:
        _restore(model, kind, doc["payload"], doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"bad payload for {kind}: {exc}") from exc
    names = doc.get("feature_names")
    if names is not None:
        model.feature_names_in_ = tuple(names)
    return model


def save_model(model, path: str | Path, feature_names=None) -> None:
    doc = model_to_doc(model, feature_names=feature_names)
    Path(path).write_text(json.dumps(doc))


def load_model(path: str | Path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"not valid JSON: {exc}") from exc
    return model_from_doc(doc)
