"""Deterministic, permutation-symmetric learning algorithms and the 0-1 loss.

Every learner here is a pure function of the multiset of learning
observations: refitting the same multiset gives a predictor with identical
outputs, and reordering the learning set changes nothing. That symmetry is
what licenses averaging the comparison kernel over unordered subsets, so all
tie-breaking below is explicit rather than incidental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Observation

# Below this many query points the plain-Python path is faster than paying
# numpy's per-call overhead on tiny arrays.
_BATCH_MIN = 8


def misclassification_loss(predicted: int, actual: int) -> float:
    """0-1 loss: 1.0 when the labels differ, else 0.0."""
    if predicted not in (0, 1):
        raise ValueError(f"predicted label must be 0 or 1, got {predicted!r}")
    if actual not in (0, 1):
        raise ValueError(f"actual label must be 0 or 1, got {actual!r}")
    return 1.0 if predicted != actual else 0.0


def _canonical(learning_set: Sequence[Observation]) -> list[Observation]:
    """Learning set in canonical order: feature lexicographic, then label."""
    if not learning_set:
        raise ValueError("cannot fit on an empty learning set")
    return sorted(learning_set, key=lambda obs: (obs.x, obs.y))


class Predictor:
    """Fitted model mapping a feature vector to a label in {0, 1}."""

    def predict(self, x: Sequence[float]) -> int:
        raise NotImplementedError

    def predict_batch(self, xs: Sequence[Sequence[float]]) -> list[int]:
        return [self.predict(x) for x in xs]


class Learner:
    """Factory for predictors; fit must be deterministic and symmetric."""

    def fit(self, learning_set: Sequence[Observation]) -> Predictor:
        raise NotImplementedError


class _ConstantPredictor(Predictor):
    def __init__(self, label: int):
        self.label = label

    def predict(self, x):
        return self.label

    def predict_batch(self, xs):
        return [self.label] * len(xs)


class _ConstantLearner(Learner):
    def __init__(self, label: int):
        if label not in (0, 1):
            raise ValueError(f"constant label must be 0 or 1, got {label!r}")
        self.label = label

    def fit(self, learning_set):
        if not learning_set:
            raise ValueError("cannot fit on an empty learning set")
        return _ConstantPredictor(self.label)


def constant_learner(label: int) -> Learner:
    """Learner that ignores the data and always predicts the given label."""
    return _ConstantLearner(label)


class _KnnPredictor(Predictor):
    def __init__(self, points: list[tuple[float, ...]], labels: list[int], k: int):
        self.points = points
        self.labels = labels
        self.k = k
        self._features = None

    def predict(self, x):
        x = tuple(x)
        d2 = [
            sum((a - b) ** 2 for a, b in zip(x, p))
            for p in self.points
        ]
        # Stable sort: equal distances resolve to the smaller canonical index.
        order = sorted(range(len(d2)), key=d2.__getitem__)
        votes = sum(self.labels[i] for i in order[: self.k])
        return 1 if 2 * votes > self.k else 0

    def predict_batch(self, xs):
        if len(xs) < _BATCH_MIN:
            return [self.predict(x) for x in xs]
        if self._features is None:
            self._features = np.array(self.points, dtype=float)
        q = np.asarray(xs, dtype=float)
        d2 = ((q[:, None, :] - self._features[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes = np.asarray(self.labels)[order].sum(axis=1)
        return [1 if 2 * v > self.k else 0 for v in votes]


class _KnnLearner(Learner):
    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k!r}")
        self.k = k

    def fit(self, learning_set):
        ordered = _canonical(learning_set)
        points = [obs.x for obs in ordered]
        labels = [obs.y for obs in ordered]
        return _KnnPredictor(points, labels, min(self.k, len(ordered)))


def knn_learner(k: int) -> Learner:
    """k-nearest-neighbour majority vote (Euclidean distance).

    Distance ties go to the smaller index after canonically sorting the
    learning set; a tied vote predicts 0. k is capped at the learning-set
    size.
    """
    return _KnnLearner(k)


class _CentroidPredictor(Predictor):
    def __init__(self, centroid0: tuple[float, ...], centroid1: tuple[float, ...]):
        self.centroid0 = centroid0
        self.centroid1 = centroid1

    def predict(self, x):
        x = tuple(x)
        d0 = sum((a - b) ** 2 for a, b in zip(x, self.centroid0))
        d1 = sum((a - b) ** 2 for a, b in zip(x, self.centroid1))
        return 1 if d1 < d0 else 0

    def predict_batch(self, xs):
        if len(xs) < _BATCH_MIN:
            return [self.predict(x) for x in xs]
        q = np.asarray(xs, dtype=float)
        d0 = ((q - np.array(self.centroid0)) ** 2).sum(axis=1)
        d1 = ((q - np.array(self.centroid1)) ** 2).sum(axis=1)
        return [1 if b < a else 0 for a, b in zip(d0, d1)]


class _CentroidLearner(Learner):
    def fit(self, learning_set):
        ordered = _canonical(learning_set)
        by_label: dict[int, list[Observation]] = {0: [], 1: []}
        for obs in ordered:
            by_label[obs.y].append(obs)
        if not by_label[0] or not by_label[1]:
            present = 0 if by_label[0] else 1
            return _ConstantPredictor(present)
        dim = len(ordered[0].x)
        centroids = {}
        for label, group in by_label.items():
            # fsum per coordinate: exact, so the mean is order-independent.
            centroids[label] = tuple(
                math.fsum(obs.x[j] for obs in group) / len(group) for j in range(dim)
            )
        return _CentroidPredictor(centroids[0], centroids[1])


def centroid_learner() -> Learner:
    """Nearest-class-centroid rule.

    Predicts the label of the closer class mean; a single-class learning set
    yields that class everywhere, and an exact distance tie predicts 0.
    """
    return _CentroidLearner()


class _StumpPredictor(Predictor):
    def __init__(self, feature: int, threshold: float, label_le: int, label_gt: int):
        self.feature = feature
        self.threshold = threshold
        self.label_le = label_le
        self.label_gt = label_gt

    def predict(self, x):
        return self.label_le if x[self.feature] <= self.threshold else self.label_gt


def _majority(labels: Sequence[int]) -> int:
    ones = sum(labels)
    zeros = len(labels) - ones
    return 1 if ones > zeros else 0


class _StumpLearner(Learner):
    def fit(self, learning_set):
        ordered = _canonical(learning_set)
        dim = len(ordered[0].x)
        best = None  # (errors, feature, threshold, label_le, label_gt)
        for j in range(dim):
            values = sorted({obs.x[j] for obs in ordered})
            for lo, hi in zip(values, values[1:]):
                threshold = (lo + hi) / 2.0
                left = [obs.y for obs in ordered if obs.x[j] <= threshold]
                right = [obs.y for obs in ordered if obs.x[j] > threshold]
                label_le = _majority(left)
                label_gt = _majority(right)
                errors = sum(1 for y in left if y != label_le) + sum(
                    1 for y in right if y != label_gt
                )
                candidate = (errors, j, threshold, label_le, label_gt)
                if best is None or candidate[:3] < best[:3]:
                    best = candidate
        if best is None:
            # Every feature is constant on the learning set; no split exists.
            return _ConstantPredictor(_majority([obs.y for obs in ordered]))
        _, j, threshold, label_le, label_gt = best
        return _StumpPredictor(j, threshold, label_le, label_gt)


def stump_learner() -> Learner:
    """Best single-feature threshold split.

    Thresholds are midpoints of consecutive distinct values per feature; each
    side predicts its own majority (ties toward 0). Equal-error candidates
    resolve by (feature index, threshold) ascending; if no split exists the
    stump degenerates to the overall majority label.
    """
    return _StumpLearner()


def parse_learner(identifier: str) -> Learner:
    """Build a learner from its CLI identifier.

    Recognized forms: "knn:<k>", "centroid", "stump", "const:<0|1>".
    """
    name, _, arg = identifier.partition(":")
    if name == "knn":
        try:
            k = int(arg)
        except ValueError:
            raise ValueError(f"bad knn parameter in {identifier!r}") from None
        return knn_learner(k)
    if name == "const":
        if arg not in ("0", "1"):
            raise ValueError(f"constant learner needs const:0 or const:1, got {identifier!r}")
        return constant_learner(int(arg))
    if name == "centroid" and not arg:
        return centroid_learner()
    if name == "stump" and not arg:
        return stump_learner()
    raise ValueError(f"unknown learner identifier {identifier!r}")
