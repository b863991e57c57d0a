"""Exhaustive ground truth over tiny discrete distributions.

Everything here is exact up to float rounding: population quantities come
from weighted sums over all ordered atom tuples, and estimator moments from
weighted sums over all s^n datasets, both enumerated in mixed-radix order
with running product weights. These brute-force values are what the
estimators are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .dataset import Dataset, Observation
from .designs import DEFAULT_ENUMERATION_BUDGET, BudgetExceededError, hypergeometric_weights
from .estimators import EstimatorConfig, _combine, estimate_delta, estimate_variance
from .kernels import ComparisonKernel, phi0_value, phi_value


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution over labelled points: ((observation, weight), ...)."""

    atoms: tuple[tuple[Observation, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple((obs, float(p)) for obs, p in self.atoms))
        if len(self.atoms) < 2:
            raise ValueError(f"need at least 2 atoms, got {len(self.atoms)}")
        for obs, p in self.atoms:
            if not p > 0.0:
                raise ValueError(f"atom weights must be positive, got {p!r}")
        total = math.fsum(p for _, p in self.atoms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom weights must sum to 1, got {total!r}")

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    @property
    def observations(self) -> tuple[Observation, ...]:
        return tuple(obs for obs, _ in self.atoms)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.atoms)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[float], int, float]]) -> "DiscreteDistribution":
        """Build from (features, label, weight) triples."""
        return cls(tuple((Observation(tuple(x), y), p) for x, y, p in rows))


def sample_dataset(dist: DiscreteDistribution, n: int, rng: np.random.Generator) -> Dataset:
    """n i.i.d. draws from the distribution, as a dataset."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    picks = rng.choice(dist.support_size, size=n, p=dist.probabilities)
    obs = tuple(dist.observations[int(i)] for i in picks)
    return Dataset(obs, feature_dim=len(obs[0].x))


def _iter_weighted_tuples(
    dist: DiscreteDistribution, length: int, budget: int
) -> Iterator[tuple[tuple[Observation, ...], float]]:
    """All support^length ordered tuples with their product weights.

    Mixed-radix (odometer) order; prefix products are reused so each step
    only recomputes weights from the changed digit onward.
    """
    s = dist.support_size
    total = s**length
    if total > budget:
        raise BudgetExceededError(
            f"enumeration needs {s}^{length} = {total} weighted tuples, over the "
            f"budget of {budget}"
        )
    obs = dist.observations
    probs = dist.probabilities
    digits = [0] * length
    prefix = [1.0] * (length + 1)
    for k in range(length):
        prefix[k + 1] = prefix[k] * probs[0]
    while True:
        yield tuple(obs[d] for d in digits), prefix[length]
        pos = length - 1
        while pos >= 0 and digits[pos] == s - 1:
            digits[pos] = 0
            pos -= 1
        if pos < 0:
            return
        digits[pos] += 1
        for k in range(pos, length):
            prefix[k + 1] = prefix[k] * probs[digits[k]]


class _Phi0Memo:
    """Value-keyed memo for the symmetrized kernel over atom multisets."""

    def __init__(self, kernel: ComparisonKernel):
        self.kernel = kernel
        self._memo: dict = {}

    def __call__(self, window: tuple[Observation, ...]) -> float:
        key = tuple(sorted((obs.x, obs.y) for obs in window))
        value = self._memo.get(key)
        if value is None:
            value = phi0_value(self.kernel, window)
            self._memo[key] = value
        return value


def true_delta(
    dist: DiscreteDistribution,
    kernel: ComparisonKernel,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """Exact expected error difference: the weighted sum of the pointwise
    kernel over all ordered (g+1)-tuples of atoms."""
    g = kernel.g
    terms = [
        w * phi_value(kernel, tup[:g], tup[g])
        for tup, w in _iter_weighted_tuples(dist, g + 1, budget)
    ]
    return math.fsum(terms)


def expected_phi0(
    dist: DiscreteDistribution,
    kernel: ComparisonKernel,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """Exact mean of the symmetrized kernel; must agree with true_delta."""
    phi0 = _Phi0Memo(kernel)
    terms = [w * phi0(tup) for tup, w in _iter_weighted_tuples(dist, kernel.m, budget)]
    return math.fsum(terms)


def true_kappa_c(
    dist: DiscreteDistribution,
    kernel: ComparisonKernel,
    c: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """Exact mean of the overlap-c product kernel over i.i.d. tuples."""
    m = kernel.m
    if not 1 <= c <= m:
        raise ValueError(f"overlap c must lie in 1..{m}, got {c}")
    phi0 = _Phi0Memo(kernel)
    terms = [
        w * phi0(tup[:m]) * phi0(tup[m - c :])
        for tup, w in _iter_weighted_tuples(dist, 2 * m - c, budget)
    ]
    return math.fsum(terms)


def true_theta2(
    dist: DiscreteDistribution,
    kernel: ComparisonKernel,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    """Exact mean of the disjoint-window product: the squared expected
    difference, computed without squaring."""
    m = kernel.m
    phi0 = _Phi0Memo(kernel)
    terms = [
        w * phi0(tup[:m]) * phi0(tup[m:])
        for tup, w in _iter_weighted_tuples(dist, 2 * m, budget)
    ]
    return math.fsum(terms)


def exact_estimator_moments(
    dist: DiscreteDistribution,
    n: int,
    estimator: Callable[[Dataset], float],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> tuple[float, float]:
    """Exact (mean, variance) of a dataset statistic under i.i.d. sampling.

    Enumerates all support^n ordered datasets with product weights and runs
    the estimator on each one.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    dim = len(dist.observations[0].x)
    mean_terms = []
    square_terms = []
    for tup, w in _iter_weighted_tuples(dist, n, budget):
        value = estimator(Dataset(tup, feature_dim=dim))
        mean_terms.append(w * value)
        square_terms.append(w * value * value)
    mean = math.fsum(mean_terms)
    return mean, math.fsum(square_terms) - mean * mean


def exact_estimator_expectation(
    dist: DiscreteDistribution,
    n: int,
    estimator: Callable[[Dataset], float],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    return exact_estimator_moments(dist, n, estimator, budget)[0]


def exact_estimator_variance(
    dist: DiscreteDistribution,
    n: int,
    estimator: Callable[[Dataset], float],
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> float:
    return exact_estimator_moments(dist, n, estimator, budget)[1]


# --- built-in self-check scenarios -----------------------------------------

#: Three separable 1-D atoms with dyadic weights (so they sum to 1 exactly).
MIXED_LABELS = DiscreteDistribution.from_rows(
    [
        ((0.0,), 0, 0.625),
        ((1.0,), 1, 0.25),
        ((2.0,), 1, 0.125),
    ]
)

#: Balanced labels; the constant learners are mirror images under label flip.
BALANCED_LABELS = DiscreteDistribution.from_rows(
    [
        ((0.0,), 0, 0.5),
        ((1.0,), 1, 0.5),
    ]
)


@dataclass(frozen=True)
class OracleScenario:
    """A tiny fully-enumerable setting the self-checks run against."""

    name: str
    description: str
    dist: DiscreteDistribution
    kernel: ComparisonKernel
    n: int


def builtin_scenarios() -> tuple[OracleScenario, ...]:
    from .learners import constant_learner, knn_learner

    return (
        OracleScenario(
            name="knn1-vs-const0",
            description="1-nearest-neighbour against always-0, three atoms, g=1, n=4",
            dist=MIXED_LABELS,
            kernel=ComparisonKernel(knn_learner(1), constant_learner(0), g=1),
            n=4,
        ),
        OracleScenario(
            name="mirror-constants",
            description="always-1 against always-0 on balanced labels, g=1, n=4",
            dist=BALANCED_LABELS,
            kernel=ComparisonKernel(constant_learner(1), constant_learner(0), g=1),
            n=4,
        ),
    )


@dataclass(frozen=True)
class CheckResult:
    """One self-check outcome: an exact residual and its tolerance."""

    scenario: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.residual) <= self.tolerance


def run_checks(
    scenarios: Sequence[OracleScenario] | None = None,
    biased_theta2: bool = False,
    tolerance: float = 1e-10,
) -> list[CheckResult]:
    """Run the exact self-checks on the built-in (or given) scenarios.

    biased_theta2 deliberately replaces the disjoint-window estimate with the
    squared point estimate inside the variance estimator; the unbiasedness
    check is then expected to fail, which demonstrates it has teeth.
    """
    if scenarios is None:
        scenarios = builtin_scenarios()
    results = []
    for sc in scenarios:
        kernel, dist, n = sc.kernel, sc.dist, sc.n
        m = kernel.m
        config = EstimatorConfig(g=kernel.g, mode="complete")
        delta = true_delta(dist, kernel)
        results.append(
            CheckResult(
                sc.name,
                "symmetrized-kernel-mean",
                expected_phi0(dist, kernel) - delta,
                tolerance,
            )
        )
        mean_delta_hat, var_delta_hat = exact_estimator_moments(
            dist, n, lambda ds: estimate_delta(kernel, ds, config)
        )
        results.append(
            CheckResult(sc.name, "point-estimate-unbiased", mean_delta_hat - delta, tolerance)
        )
        weights = hypergeometric_weights(n, m)
        kappa_trues = tuple(true_kappa_c(dist, kernel, c) for c in range(1, m + 1))
        decomposition = _combine(weights, kappa_trues, true_theta2(dist, kernel))
        results.append(
            CheckResult(
                sc.name, "variance-decomposition", var_delta_hat - decomposition, tolerance
            )
        )

        if biased_theta2:

            def v_hat(ds: Dataset) -> float:
                ve = estimate_variance(kernel, ds, config)
                biased = estimate_delta(kernel, ds, config) ** 2
                return _combine(ve.weights, ve.kappa_hats, biased)

        else:

            def v_hat(ds: Dataset) -> float:
                return estimate_variance(kernel, ds, config).v_hat

        import warnings as _warnings

        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", RuntimeWarning)
            mean_v_hat = exact_estimator_expectation(dist, n, v_hat)
        results.append(
            CheckResult(
                sc.name, "variance-estimate-unbiased", mean_v_hat - var_delta_hat, tolerance
            )
        )
    return results
