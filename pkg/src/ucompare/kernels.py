"""Error-difference kernels: pointwise, symmetrized, and product forms.

The pointwise kernel trains both algorithms on g observations and scores
their loss difference on one held-out observation; with the 0-1 loss it takes
values in {-1, 0, 1}. The symmetrized kernel averages the g + 1 rotations of
a size-(g+1) subset through the test position, which makes it invariant
under permutations of the subset (the learners themselves are
permutation-symmetric, so rotations are enough). Product kernels multiply
two symmetrized evaluations on windows that overlap in exactly c positions;
their means are the second-moment quantities behind the variance estimate.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .dataset import Dataset, Observation
from .designs import OrderedSplit, UnorderedSubset
from .learners import Learner, Predictor, misclassification_loss

DEFAULT_CACHE_SIZE = 100_000

# Batch prediction pays off once the held-out block is reasonably large.
_BATCH_MIN = 8


@dataclass(frozen=True)
class ComparisonKernel:
    """The two algorithms under comparison, their loss, and the split size g."""

    learner_a: Learner
    learner_b: Learner
    loss: Callable[[int, int], float] = misclassification_loss
    g: int = 1

    def __post_init__(self):
        if self.g < 1:
            raise ValueError(f"g must be >= 1, got {self.g!r}")

    @property
    def m(self) -> int:
        """Subset size for the symmetrized kernel: g + 1."""
        return self.g + 1


def phi_value(
    kernel: ComparisonKernel,
    learn_obs: Sequence[Observation],
    test_obs: Observation,
) -> float:
    """Loss difference of the two fitted predictors at one test point."""
    if len(learn_obs) != kernel.g:
        raise ValueError(f"expected {kernel.g} learning observations, got {len(learn_obs)}")
    pred_a = kernel.learner_a.fit(learn_obs)
    pred_b = kernel.learner_b.fit(learn_obs)
    return kernel.loss(pred_a.predict(test_obs.x), test_obs.y) - kernel.loss(
        pred_b.predict(test_obs.x), test_obs.y
    )


def phi0_value(kernel: ComparisonKernel, subset_obs: Sequence[Observation]) -> float:
    """Symmetrized kernel on g + 1 observations.

    Each position serves as the test point once, with the rest as the
    learning set; the g + 1 evaluations are averaged.
    """
    m = kernel.m
    if len(subset_obs) != m:
        raise ValueError(f"expected {m} observations, got {len(subset_obs)}")
    subset_obs = list(subset_obs)
    values = [
        phi_value(kernel, subset_obs[:i] + subset_obs[i + 1 :], subset_obs[i])
        for i in range(m)
    ]
    return math.fsum(values) / m


class _LruCache:
    """Bounded thread-safe LRU map (None values are not cacheable)."""

    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            try:
                value = self._data[key]
            except KeyError:
                return None
            self._data.move_to_end(key)
            return value

    def put(self, key, value):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return
            self._data[key] = value
            if len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def __len__(self):
        return len(self._data)


class KernelEvaluator:
    """Kernel evaluation against one dataset, with bounded memoization.

    Fitted predictor pairs and symmetrized values are cached by the
    observation values of the learning multiset (canonically sorted), not by
    index set: determinism guarantees that equal multisets give predictors
    with identical outputs, so value-equal subsets can share one fit.
    """

    def __init__(
        self,
        kernel: ComparisonKernel,
        data: Dataset,
        cache_size: int = DEFAULT_CACHE_SIZE,
    ):
        if kernel.m > data.n:
            raise ValueError(
                f"subset size g + 1 = {kernel.m} exceeds the sample size {data.n}"
            )
        self.kernel = kernel
        self.data = data
        self._fits = _LruCache(cache_size)
        self._phi0s = _LruCache(cache_size)
        # Index-level front for phi0 and per-row sums: indices are cheaper to
        # hash than observation values, and repeats are common in long runs.
        self._phi0s_by_index = _LruCache(cache_size)
        self._phi_rows = _LruCache(cache_size)

    def _value_key(self, indices: Iterable[int]) -> tuple:
        return tuple(
            sorted((obs.x, obs.y) for obs in self.data.subset(indices))
        )

    def _fit_pair(self, key: tuple, learn_indices: Sequence[int]) -> tuple[Predictor, Predictor]:
        pair = self._fits.get(key)
        if pair is None:
            learn_obs = self.data.subset(learn_indices)
            pair = (
                self.kernel.learner_a.fit(learn_obs),
                self.kernel.learner_b.fit(learn_obs),
            )
            self._fits.put(key, pair)
        return pair

    def predictor_pair(self, learn_indices: Sequence[int]) -> tuple[Predictor, Predictor]:
        """Fit both learners on the rows at learn_indices, via the cache."""
        return self._fit_pair(self._value_key(learn_indices), learn_indices)

    def phi(self, learn_indices: Sequence[int], test_index: int) -> float:
        if len(learn_indices) != self.kernel.g:
            raise ValueError(
                f"expected {self.kernel.g} learning indices, got {len(learn_indices)}"
            )
        if test_index in learn_indices:
            raise ValueError(f"test index {test_index} also appears in the learning part")
        pred_a, pred_b = self.predictor_pair(learn_indices)
        obs = self.data.observation(test_index)
        loss = self.kernel.loss
        return loss(pred_a.predict(obs.x), obs.y) - loss(pred_b.predict(obs.x), obs.y)

    def phi_batch(self, learn_indices: Sequence[int], test_indices: Sequence[int]) -> list[float]:
        """phi against a common learning set for every test index."""
        pred_a, pred_b = self.predictor_pair(learn_indices)
        loss = self.kernel.loss
        test_obs = self.data.subset(test_indices)
        if len(test_obs) >= _BATCH_MIN:
            xs = self.data.feature_matrix[[i - 1 for i in test_indices]]
            out_a = pred_a.predict_batch(xs)
            out_b = pred_b.predict_batch(xs)
        else:
            out_a = [pred_a.predict(obs.x) for obs in test_obs]
            out_b = [pred_b.predict(obs.x) for obs in test_obs]
        return [
            loss(a, obs.y) - loss(b, obs.y)
            for a, b, obs in zip(out_a, out_b, test_obs)
        ]

    def phi0(self, member_indices: Iterable[int]) -> float:
        """Symmetrized kernel over a subset, cached by its observation values."""
        members = sorted(member_indices)
        m = self.kernel.m
        if len(members) != m or len(set(members)) != m:
            raise ValueError(f"need {m} distinct indices, got {tuple(member_indices)}")
        index_key = tuple(members)
        cached = self._phi0s_by_index.get(index_key)
        if cached is not None:
            return cached
        key = self._value_key(members)
        result = self._phi0s.get(key)
        if result is None:
            values = [
                self.phi(tuple(members[:i] + members[i + 1 :]), members[i])
                for i in range(m)
            ]
            result = math.fsum(values) / m
            self._phi0s.put(key, result)
        self._phi0s_by_index.put(index_key, result)
        return result

    def phi_complement_total(self, learn_indices: Sequence[int]) -> float:
        """Sum of phi over every row outside learn_indices, fitting once.

        The per-row values depend only on the learning multiset, so they are
        computed with one batch prediction pass per distinct multiset and the
        complement sum is recovered by subtracting the learning rows. With
        the 0-1 loss every term is an integer, so this equals the direct sum
        over the held-out rows exactly.
        """
        if len(learn_indices) != self.kernel.g:
            raise ValueError(
                f"expected {self.kernel.g} learning indices, got {len(learn_indices)}"
            )
        key = self._value_key(learn_indices)
        entry = self._phi_rows.get(key)
        if entry is None:
            pred_a, pred_b = self._fit_pair(key, learn_indices)
            loss = self.kernel.loss
            observations = self.data.observations
            if self.data.n >= _BATCH_MIN:
                out_a = pred_a.predict_batch(self.data.feature_matrix)
                out_b = pred_b.predict_batch(self.data.feature_matrix)
            else:
                out_a = [pred_a.predict(obs.x) for obs in observations]
                out_b = [pred_b.predict(obs.x) for obs in observations]
            rows = tuple(
                loss(a, obs.y) - loss(b, obs.y)
                for a, b, obs in zip(out_a, out_b, observations)
            )
            entry = (rows, math.fsum(rows))
            self._phi_rows.put(key, entry)
        rows, total = entry
        return total - math.fsum(rows[i - 1] for i in learn_indices)

    def product(self, indices: Sequence[int], overlap: int) -> float:
        """Product of symmetrized values on the two standard windows.

        indices has length 2m - overlap; the windows are the first m and the
        last m positions, sharing exactly `overlap` middle positions.
        """
        m = self.kernel.m
        if not 0 <= overlap <= m:
            raise ValueError(f"overlap must lie in 0..{m}, got {overlap}")
        if len(indices) != 2 * m - overlap:
            raise ValueError(
                f"expected {2 * m - overlap} indices for overlap {overlap}, got {len(indices)}"
            )
        if len(set(indices)) != len(indices):
            raise ValueError(f"indices must be distinct, got {tuple(indices)}")
        first = self.phi0(indices[:m])
        if overlap == m:
            return first * first
        return first * self.phi0(indices[m - overlap :])


def eval_phi(kernel: ComparisonKernel, data: Dataset, split: OrderedSplit) -> float:
    """Pointwise kernel at one learning/testing split of the dataset."""
    if len(split.learn) != kernel.g:
        raise ValueError(f"split has {len(split.learn)} learning indices, kernel expects {kernel.g}")
    return phi_value(kernel, data.subset(split.learn), data.observation(split.test))


def eval_phi0(
    kernel: ComparisonKernel, data: Dataset, subset: UnorderedSubset | Iterable[int]
) -> float:
    """Symmetrized kernel at an unordered subset of g + 1 row indices."""
    members = subset.sorted_members() if isinstance(subset, UnorderedSubset) else tuple(subset)
    return KernelEvaluator(kernel, data, cache_size=4 * kernel.m).phi0(members)


def eval_kappa_kernel(
    kernel: ComparisonKernel, data: Dataset, c: int, indices: Sequence[int]
) -> float:
    """Product kernel for overlap c in 1..m on 2m - c distinct indices.

    The first window is indices[0:m], the second indices[m-c:], so entries
    m-c..m-1 (0-based) are shared.
    """
    if not 1 <= c <= kernel.m:
        raise ValueError(f"overlap c must lie in 1..{kernel.m}, got {c}")
    return KernelEvaluator(kernel, data, cache_size=8 * kernel.m).product(tuple(indices), c)


def eval_theta2_kernel(kernel: ComparisonKernel, data: Dataset, indices: Sequence[int]) -> float:
    """Product kernel on two disjoint windows (overlap 0) of m indices each."""
    return KernelEvaluator(kernel, data, cache_size=8 * kernel.m).product(tuple(indices), 0)
