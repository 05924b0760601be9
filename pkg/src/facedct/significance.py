"""Test-set sizing: how many trials make an empirical error rate
statistically significant, and the smallest error rate a given trial
count can resolve.

Model: errors are i.i.d. Bernoulli and the estimate must not understate
the true rate by more than a relative margin beta, except with risk
alpha.  That yields N = -ln(alpha) / (beta^2 * P); for alpha = 0.05 and
beta = 0.2 the constant -ln(alpha)/beta^2 = 74.893 rounds up to the
common simplified rule N = 100 / P.  Correlated samples need a larger N
than either rule reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

RULES = ("exact", "simplified")

#: alpha/beta behind the simplified 100/P rule
SIMPLIFIED_ALPHA = 0.05
SIMPLIFIED_BETA = 0.2


@dataclass(frozen=True)
class SignificanceParams:
    alpha: float = SIMPLIFIED_ALPHA
    beta: float = SIMPLIFIED_BETA
    p: float = 0.01

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must be in (0, 1]")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must be in (0, 1]")


def required_n_exact(params: SignificanceParams) -> float:
    """-ln(alpha) / (beta^2 * p), before rounding up to whole trials."""
    return -math.log(params.alpha) / (params.beta**2 * params.p)


def required_n(params: SignificanceParams) -> int:
    """Smallest whole trial count satisfying the significance bound."""
    return math.ceil(required_n_exact(params))


def simplified_n(p: float) -> int:
    """The 100/P rule of thumb (alpha = 0.05, beta = 0.2, rounded up)."""
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    return math.ceil(100.0 / p)


def min_resolvable_error_rate(
    n: int,
    rule: str = "simplified",
    alpha: float = SIMPLIFIED_ALPHA,
    beta: float = SIMPLIFIED_BETA,
) -> float:
    """Smallest error rate that n trials estimate significantly.

    Inverse of the sizing rules: "simplified" gives 100/n, "exact" gives
    -ln(alpha) / (beta^2 * n).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if rule not in RULES:
        raise ValueError(f"rule must be one of {RULES}, got {rule!r}")
    if rule == "simplified":
        return 100.0 / n
    return -math.log(alpha) / (beta**2 * n)
