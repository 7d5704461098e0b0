"""Decision tree and bagged random forest on sparse count features.

Comparison-grade baselines. Splits are greedy entropy-gain tests of the
form count(feature) > threshold with thresholds restricted to 0.5/1.5/2.5
(counts are small integers). Defaults: depth limit 30, minimum gain
0.0075, 100 trees.
"""

from __future__ import annotations

import math
import random
from typing import Sequence

import numpy as np

from ..vectorizer import LabeledPoint
from .model import TrainedModel, check_training_data, infer_classes

THRESHOLDS = (0.5, 1.5, 2.5)
TREE_DEFAULTS = {"max_depth": 30, "min_gain": 0.0075}
FOREST_DEFAULTS = {"max_depth": 30, "min_gain": 0.0075, "n_trees": 100}


def _entropy(counts: np.ndarray, total: int) -> float:
    if total == 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def _leaf(class_counts: np.ndarray, total: int) -> dict:
    return {"leaf": True, "dist": [c / total for c in class_counts]}


def _best_split(indices, labels, feats, k, allowed):
    """(gain, feature, threshold) of the best candidate split, or None.

    Ties break toward the smaller feature index, then smaller threshold."""
    n = len(indices)
    class_counts = np.bincount(labels[indices], minlength=k)
    parent_h = _entropy(class_counts, n)
    if parent_h == 0.0:
        return None, class_counts

    # hist[j][t_idx] = per-class count of points with feature j > THRESHOLDS[t_idx]
    hist: dict[int, np.ndarray] = {}
    for idx in indices:
        y = labels[idx]
        for j, c in feats[idx]:
            if allowed is not None and j not in allowed:
                continue
            row = hist.get(j)
            if row is None:
                row = np.zeros((len(THRESHOLDS), k), dtype=np.int64)
                hist[j] = row
            row[0, y] += 1  # c >= 1 always holds for stored entries
            if c >= 2:
                row[1, y] += 1
            if c >= 3:
                row[2, y] += 1

    best = None
    for j in sorted(hist):
        row = hist[j]
        for t_idx, threshold in enumerate(THRESHOLDS):
            right = row[t_idx]
            n_right = int(right.sum())
            if n_right == 0 or n_right == n:
                continue
            left = class_counts - right
            n_left = n - n_right
            gain = parent_h - (n_left / n) * _entropy(left, n_left) - (n_right / n) * _entropy(right, n_right)
            if best is None or gain > best[0]:
                best = (gain, j, threshold)
    return best, class_counts


def _grow(indices, labels, feats, k, depth, max_depth, min_gain, allowed, value_of):
    n = len(indices)
    split, class_counts = _best_split(indices, labels, feats, k, allowed)
    if depth >= max_depth or split is None or split[0] < min_gain:
        return _leaf(class_counts, n)
    _, j, threshold = split
    left_idx, right_idx = [], []
    for idx in indices:
        (right_idx if value_of(idx, j) > threshold else left_idx).append(idx)
    return {
        "leaf": False,
        "feature": j,
        "threshold": threshold,
        "left": _grow(left_idx, labels, feats, k, depth + 1, max_depth, min_gain, allowed, value_of),
        "right": _grow(right_idx, labels, feats, k, depth + 1, max_depth, min_gain, allowed, value_of),
    }


def _prepare(data: Sequence[LabeledPoint], classes):
    index = {c: i for i, c in enumerate(classes)}
    labels = np.array([index[p.label] for p in data], dtype=np.int64)
    feats = [p.vector.entries for p in data]
    lookup = [dict(e) for e in feats]

    def value_of(idx: int, j: int) -> int:
        return lookup[idx].get(j, 0)

    return labels, feats, value_of


def train_tree(
    data: Sequence[LabeledPoint],
    max_depth: int = 30,
    min_gain: float = 0.0075,
    classes: Sequence[str] | None = None,
) -> TrainedModel:
    dim = check_training_data(data)
    classes = tuple(classes) if classes is not None else infer_classes(data)
    labels, feats, value_of = _prepare(data, classes)
    root = _grow(list(range(len(data))), labels, feats, len(classes), 0, max_depth, min_gain, None, value_of)
    return TrainedModel(
        method="decision_tree",
        dim=dim,
        classes=classes,
        params={"max_depth": max_depth, "min_gain": min_gain},
        state={"root": root},
    )


def train_forest(
    data: Sequence[LabeledPoint],
    n_trees: int = 100,
    max_depth: int = 30,
    min_gain: float = 0.0075,
    feature_fraction: float | None = None,
    bootstrap: bool = True,
    seed: int = 0,
    classes: Sequence[str] | None = None,
) -> TrainedModel:
    """Bagged trees; feature_fraction=None samples sqrt(dim) features per tree."""
    dim = check_training_data(data)
    classes = tuple(classes) if classes is not None else infer_classes(data)
    labels, feats, value_of = _prepare(data, classes)
    n = len(data)
    if feature_fraction is None:
        n_features = max(1, int(round(math.sqrt(dim))))
    else:
        n_features = max(1, int(round(feature_fraction * dim)))
    trees = []
    for t in range(n_trees):
        rng = random.Random(seed * 1_000_003 + t)
        indices = [rng.randrange(n) for _ in range(n)] if bootstrap else list(range(n))
        allowed = None if n_features >= dim else frozenset(rng.sample(range(dim), n_features))
        trees.append(_grow(indices, labels, feats, len(classes), 0, max_depth, min_gain, allowed, value_of))
    return TrainedModel(
        method="random_forest",
        dim=dim,
        classes=classes,
        params={
            "n_trees": n_trees,
            "max_depth": max_depth,
            "min_gain": min_gain,
            "feature_fraction": feature_fraction,
            "bootstrap": bootstrap,
            "seed": seed,
        },
        state={"trees": trees},
    )
