"""Studentized two-sided test of equal error rates, with confidence interval.

The point estimate divided by the square root of a variance estimate u(n) is
asymptotically standard normal, so |estimate| >= sqrt(u(n)) * z_(1-alpha/2)
rejects equality at level alpha. u(n) is either the unbiased variance
estimate ("unbiased", the default) or the large-sample plug-in
(g+1)^2 * (kappa_1_hat - theta2_hat) / n ("plugin_asymptotic").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .estimators import VarianceEstimate

UNBIASED = "unbiased"
PLUGIN_ASYMPTOTIC = "plugin_asymptotic"

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


class DegenerateVarianceError(ValueError):
    """Studentization was asked for with a nonpositive variance estimate."""

    def __init__(self, u_n: float):
        super().__init__(f"variance estimate u(n) = {u_n!r} is not positive")
        self.u_n = u_n


@dataclass(frozen=True)
class TestResult:
    """Outcome of the two-sided comparison test.

    When degenerate is set (no positive variance estimate was available),
    statistic, p_value, the interval, and reject are all None: no decision.
    """

    delta_hat: float
    u_n: float
    alpha: float
    mode_used: str
    degenerate: bool
    statistic: float | None
    p_value: float | None
    ci_low: float | None
    ci_high: float | None
    reject: bool | None


def normal_cdf(x: float) -> float:
    """Standard normal distribution function, via the complementary error
    function (accurate in both tails)."""
    return 0.5 * math.erfc(-x / _SQRT2)


# Rational approximation of the standard normal quantile (Acklam's
# coefficients, relative error below 1.2e-9), refined below with one Halley
# step against normal_cdf.
_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_P_LOW = 0.02425


def normal_quantile(p: float) -> float:
    """Standard normal quantile on (0, 1).

    Rational approximation plus one Halley refinement step; the roundtrip
    normal_cdf(normal_quantile(p)) is accurate to well below 1e-12.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p!r}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = (
            (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5])
            * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    # One Halley step: e is the cdf error, u the Newton correction.
    e = normal_cdf(x) - p
    u = e * _SQRT_2PI * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


def plugin_variance(kappa1_hat: float, theta2_hat: float, g: int, n: int) -> float:
    """Large-sample variance approximation (g+1)^2 (kappa_1 - theta2) / n."""
    if g < 1 or n < 1:
        raise ValueError(f"need g >= 1 and n >= 1, got g={g}, n={n}")
    return (g + 1) ** 2 * (kappa1_hat - theta2_hat) / n


def studentize(delta_hat: float, u_n: float) -> float:
    """delta_hat / sqrt(u_n); errors out rather than divide by a nonpositive
    variance."""
    if u_n <= 0.0:
        raise DegenerateVarianceError(u_n)
    return delta_hat / math.sqrt(u_n)


def confidence_interval(delta_hat: float, u_n: float, alpha: float) -> tuple[float, float]:
    """Two-sided level-(1 - alpha) interval delta_hat -+ sqrt(u_n) * z.

    u_n = 0 is allowed and collapses to the point interval.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    if u_n < 0.0:
        raise DegenerateVarianceError(u_n)
    half_width = math.sqrt(u_n) * normal_quantile(1.0 - alpha / 2.0)
    return (delta_hat - half_width, delta_hat + half_width)


def two_sided_test(
    delta_hat: float,
    u_n: float,
    alpha: float = 0.05,
    mode_used: str = UNBIASED,
) -> TestResult:
    """Two-sided test of a zero error difference at level alpha.

    p = 2 * (1 - cdf(|statistic|)); rejection is non-strict (p <= alpha). A
    nonpositive u_n yields a degenerate result carrying the raw value and no
    decision.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
    if u_n <= 0.0:
        return TestResult(
            delta_hat=delta_hat,
            u_n=u_n,
            alpha=alpha,
            mode_used=mode_used,
            degenerate=True,
            statistic=None,
            p_value=None,
            ci_low=None,
            ci_high=None,
            reject=None,
        )
    statistic = studentize(delta_hat, u_n)
    # erfc(|z|/sqrt(2)) equals 2*(1 - cdf(|z|)) without cancellation.
    p_value = math.erfc(abs(statistic) / _SQRT2)
    ci_low, ci_high = confidence_interval(delta_hat, u_n, alpha)
    return TestResult(
        delta_hat=delta_hat,
        u_n=u_n,
        alpha=alpha,
        mode_used=mode_used,
        degenerate=False,
        statistic=statistic,
        p_value=p_value,
        ci_low=ci_low,
        ci_high=ci_high,
        reject=p_value <= alpha,
    )


def test_error_difference(
    delta_hat: float,
    variance: VarianceEstimate,
    n: int,
    g: int,
    alpha: float = 0.05,
    mode: str = UNBIASED,
) -> TestResult:
    """Full inference step with the documented fallback chain.

    mode "unbiased" studentizes with v_hat; if v_hat is nonpositive it falls
    back to the plug-in variance and records that in mode_used. mode
    "plugin_asymptotic" uses the plug-in directly. If no positive variance
    is available the result is degenerate.
    """
    if mode not in (UNBIASED, PLUGIN_ASYMPTOTIC):
        raise ValueError(f"unknown variance mode {mode!r}")
    plugin = plugin_variance(variance.kappa_hats[0], variance.theta2_hat, g, n)
    if mode == UNBIASED:
        if variance.v_hat > 0.0:
            return two_sided_test(delta_hat, variance.v_hat, alpha, mode_used=UNBIASED)
        return two_sided_test(delta_hat, plugin, alpha, mode_used=PLUGIN_ASYMPTOTIC)
    return two_sided_test(delta_hat, plugin, alpha, mode_used=PLUGIN_ASYMPTOTIC)
