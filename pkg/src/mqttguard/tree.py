"""Binary decision-tree induction used by the tree-based classifiers.

Two growers share the same node type and split machinery:

* classification trees greedily minimize weighted Gini impurity;
* regression trees maximize the second-order (gradient/hessian) gain used
  by Newton-boosted ensembles, with L2-regularized leaf weights.

Split candidates are midpoints between consecutive distinct sorted values.
Ties resolve deterministically: best gain wins, then the lowest feature
index, then the lowest threshold. Rows route left when x[feature] <= threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (probs/value)."""

    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    probs: np.ndarray | None = None  # classification leaf: class frequencies
    code: int = -1                   # classification leaf: argmax with lowest-code ties
    value: float = 0.0               # regression leaf weight

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        # iterative conversion; deep trees must not hit the recursion limit
        root_doc: dict = {}
        stack = [(self, root_doc)]
        while stack:
            node, doc = stack.pop()
            if node.is_leaf:
                if node.probs is not None:
                    doc["probs"] = node.probs.tolist()
                    doc["code"] = int(node.code)
                else:
                    doc["value"] = float(node.value)
            else:
                doc["feature"] = int(node.feature)
                doc["threshold"] = float(node.threshold)
                doc["left"] = {}
                doc["right"] = {}
                stack.append((node.left, doc["left"]))
                stack.append((node.right, doc["right"]))
        return root_doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TreeNode":
        root = cls()
        stack = [(root, doc)]
        while stack:
            node, d = stack.pop()
            if "feature" in d:
                node.feature = int(d["feature"])
                node.threshold = float(d["threshold"])
                node.left = cls()
                node.right = cls()
                stack.append((node.left, d["left"]))
                stack.append((node.right, d["right"]))
            elif "probs" in d:
                node.probs = np.asarray(d["probs"], dtype=np.float64)
                node.code = int(d["code"])
            else:
                node.value = float(d["value"])
        return root


def _gini_from_counts(counts: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Gini impurity for stacked count vectors; rows with total 0 yield 0."""
    safe = np.where(total > 0, total, 1)
    p = counts / safe[:, None]
    return 1.0 - (p**2).sum(axis=1)


def _best_split_gini(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    feature_indices: np.ndarray,
) -> tuple[int, float, float]:
    """Best (feature, threshold, impurity_decrease) over the given features.

    Returns feature -1 when no feature has two distinct values.
    """
    m = X.shape[0]
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_gini = 1.0 - ((counts / m) ** 2).sum()
    onehot = np.zeros((m, n_classes))
    onehot[np.arange(m), y] = 1.0

    best_feature, best_threshold, best_decrease = -1, 0.0, -1.0
    for f in feature_indices:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        boundaries = np.flatnonzero(sv[:-1] < sv[1:])
        if boundaries.size == 0:
            continue
        left_counts = np.cumsum(onehot[order], axis=0)[boundaries]
        n_left = (boundaries + 1).astype(np.float64)
        n_right = m - n_left
        gini_left = _gini_from_counts(left_counts, n_left)
        gini_right = _gini_from_counts(counts - left_counts, n_right)
        decrease = parent_gini - (n_left * gini_left + n_right * gini_right) / m
        pick = int(np.argmax(decrease))  # first max -> lowest threshold
        if decrease[pick] > best_decrease:
            best_decrease = float(decrease[pick])
            best_feature = int(f)
            i = boundaries[pick]
            thr = 0.5 * (sv[i] + sv[i + 1])
            if thr >= sv[i + 1]:  # midpoint rounded onto the right value
                thr = sv[i]
            best_threshold = float(thr)
    return best_feature, best_threshold, best_decrease


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_impurity_decrease: float = 0.0,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeNode:
    """CART with Gini impurity.

    With the defaults (unlimited depth, zero required decrease) the tree
    keeps splitting any impure node that still has a separating value, so
    consistent training data is fit exactly. Nodes whose rows are all
    identical become majority leaves with lowest-code tie-breaks.
    """
    d = X.shape[1]

    def into_leaf(node: TreeNode, idx: np.ndarray) -> None:
        counts = np.bincount(y[idx], minlength=n_classes).astype(np.float64)
        node.probs = counts / counts.sum()
        node.code = int(np.argmax(counts))

    root = TreeNode()
    # explicit stack: unlimited-depth trees may exceed the recursion limit
    stack: list[tuple[TreeNode, np.ndarray, int]] = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        labels = y[idx]
        if (
            (max_depth is not None and depth >= max_depth)
            or len(idx) < min_samples_split
            or (labels == labels[0]).all()
        ):
            into_leaf(node, idx)
            continue
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            feats = np.arange(d)
        feature, threshold, decrease = _best_split_gini(X[idx], labels, n_classes, feats)
        if feature < 0 or decrease < min_impurity_decrease:
            into_leaf(node, idx)
            continue
        mask = X[idx, feature] <= threshold
        node.feature, node.threshold = feature, threshold
        node.left, node.right = TreeNode(), TreeNode()
        stack.append((node.right, idx[~mask], depth + 1))
        stack.append((node.left, idx[mask], depth + 1))
    return root


def _best_split_newton(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    reg_lambda: float,
    feature_indices: np.ndarray,
) -> tuple[int, float, float]:
    """Best split by second-order gain: max of GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)."""
    G, H = g.sum(), h.sum()
    parent_score = G * G / (H + reg_lambda)
    best_feature, best_threshold, best_gain = -1, 0.0, 0.0
    for f in feature_indices:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        boundaries = np.flatnonzero(sv[:-1] < sv[1:])
        if boundaries.size == 0:
            continue
        gl = np.cumsum(g[order])[boundaries]
        hl = np.cumsum(h[order])[boundaries]
        gr = G - gl
        hr = H - hl
        gain = 0.5 * (
            gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent_score
        )
        pick = int(np.argmax(gain))
        if gain[pick] > best_gain:
            best_gain = float(gain[pick])
            best_feature = int(f)
            i = boundaries[pick]
            thr = 0.5 * (sv[i] + sv[i + 1])
            if thr >= sv[i + 1]:
                thr = sv[i]
            best_threshold = float(thr)
    return best_feature, best_threshold, best_gain


def grow_regression_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    max_depth: int = 6,
    reg_lambda: float = 1.0,
    min_samples_split: int = 2,
) -> TreeNode:
    """Newton-step regression tree; leaf weight = -sum(g) / (sum(h) + lambda)."""

    def into_leaf(node: TreeNode, idx: np.ndarray) -> None:
        node.value = float(-g[idx].sum() / (h[idx].sum() + reg_lambda))

    root = TreeNode()
    stack: list[tuple[TreeNode, np.ndarray, int]] = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or len(idx) < min_samples_split:
            into_leaf(node, idx)
            continue
        feature, threshold, gain = _best_split_newton(
            X[idx], g[idx], h[idx], reg_lambda, np.arange(X.shape[1])
        )
        if feature < 0 or gain <= 0.0:
            into_leaf(node, idx)
            continue
        mask = X[idx, feature] <= threshold
        node.feature, node.threshold = feature, threshold
        node.left, node.right = TreeNode(), TreeNode()
        stack.append((node.right, idx[~mask], depth + 1))
        stack.append((node.left, idx[mask], depth + 1))
    return root


# --------------------------------------------------------------------------
# batched prediction
# --------------------------------------------------------------------------

def tree_apply_proba(root: TreeNode, X: np.ndarray, n_classes: int) -> np.ndarray:
    """Leaf class-frequency vector for every row (batched routing)."""
    out = np.empty((X.shape[0], n_classes))
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.probs
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def tree_apply_value(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Regression leaf weight for every row (batched routing)."""
    out = np.empty(X.shape[0])
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
            continue
        mask = X[idx, node.feature] <= node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out
